import json

import numpy as np
import pytest
from scipy.io import wavfile

from ampvoc import checkpoint
from ampvoc.cli import main
from ampvoc.generator import GeneratorConfig, build_generator
from ampvoc.mel import read_mel

from oracles import tone

_DIL = [[[1, 1], [3, 1], [5, 1]]] * 3

TINY = {
    "variant": "tiny",
    "h": 16,
    "upsample_rates": [8, 8, 2, 2],
    "kernels": [3, 7, 11],
    "dilations": _DIL,
    "use_filter": True,
    "activation": "snake",
    "n_mels": 100,
    "sample_rate": 24000,
}


@pytest.fixture
def tiny_ckpt(tmp_path):
    cfg = GeneratorConfig.from_dict(TINY)
    path = tmp_path / "tiny.bvgw"
    checkpoint.save(build_generator(cfg, seed=0), path)
    return path


@pytest.fixture
def wav_8192(tmp_path):
    path = tmp_path / "in.wav"
    wavfile.write(path, 24000, tone(440.0, 8192, amplitude=0.5))
    return path


class TestPipeline:
    def test_mel_vocode_copysyn(self, tmp_path, tiny_ckpt, wav_8192, capsys):
        mel_path = tmp_path / "x.bvgm"
        assert main(["mel", str(wav_8192), str(mel_path)]) == 0
        mel = read_mel(mel_path)
        assert mel.shape == (100, 32)

        out_wav = tmp_path / "out.wav"
        assert main(["vocode", str(tiny_ckpt), str(mel_path), str(out_wav)]) == 0
        rate, data = wavfile.read(out_wav)
        assert (rate, data.dtype, data.shape) == (24000, np.float32, (8192,))

        cs_wav = tmp_path / "cs.wav"
        assert main(["copysyn", str(tiny_ckpt), str(wav_8192), str(cs_wav)]) == 0
        _, cs = wavfile.read(cs_wav)
        assert cs.shape == (8192,)
        assert np.isfinite(cs).all()
        assert np.all(np.abs(cs) < 1.0)

    def test_copysyn_truncates_to_hop_multiple(self, tmp_path, tiny_ckpt):
        in_wav = tmp_path / "odd.wav"
        wavfile.write(in_wav, 24000, tone(330.0, 8192 + 100, amplitude=0.5))
        out_wav = tmp_path / "out.wav"
        assert main(["copysyn", str(tiny_ckpt), str(in_wav), str(out_wav)]) == 0
        _, data = wavfile.read(out_wav)
        assert data.shape == (8192,)

    def test_pcm16_output_with_dither(self, tmp_path, tiny_ckpt, wav_8192):
        out_wav = tmp_path / "out16.wav"
        assert main(["--pcm16", "copysyn", str(tiny_ckpt), str(wav_8192), str(out_wav)]) == 0
        _, data = wavfile.read(out_wav)
        assert data.dtype == np.int16


class TestRejections:
    def test_stereo_rejected_exit_2(self, tmp_path, tiny_ckpt):
        stereo = tmp_path / "stereo.wav"
        wavfile.write(stereo, 24000, np.zeros((1000, 2), dtype=np.float32))
        assert main(["mel", str(stereo), str(tmp_path / "x.bvgm")]) == 2

    def test_wrong_rate_rejected_exit_2(self, tmp_path):
        wav = tmp_path / "sr16.wav"
        wavfile.write(wav, 16000, np.zeros(4000, dtype=np.float32))
        assert main(["mel", str(wav), str(tmp_path / "x.bvgm")]) == 2

    def test_bad_checkpoint_exit_3(self, tmp_path, wav_8192):
        bad = tmp_path / "bad.bvgw"
        bad.write_bytes(b"JUNKJUNKJUNK")
        assert main(["copysyn", str(bad), str(wav_8192), str(tmp_path / "o.wav")]) == 3

    def test_band_mismatch_exit_4(self, tmp_path, tiny_ckpt):
        from ampvoc.mel import write_mel

        mel_path = tmp_path / "narrow.bvgm"
        write_mel(mel_path, np.zeros((80, 4), dtype=np.float32))
        assert main(["vocode", str(tiny_ckpt), str(mel_path), str(tmp_path / "o.wav")]) == 4

    def test_missing_file_exit_2(self, tmp_path):
        assert main(["mel", str(tmp_path / "nope.wav"), str(tmp_path / "x.bvgm")]) == 2

    def test_bench_too_few_runs_exit_2(self, tiny_ckpt):
        assert main(["bench", str(tiny_ckpt), "--runs", "2"]) == 2


class TestReports:
    def test_metrics_identity_schema(self, wav_8192, capsys):
        assert main(["metrics", str(wav_8192), str(wav_8192)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert set(report) == {"m_stft", "mcd", "periodicity_rmse", "vuv_f1", "mae"}
        assert report["m_stft"] == 0.0 and report["vuv_f1"] == 1.0

    def test_metrics_manifest_batch(self, tmp_path, wav_8192, capsys):
        manifest = tmp_path / "pairs.txt"
        manifest.write_text(f"{wav_8192} {wav_8192}\n{wav_8192} {wav_8192}\n")
        assert main(["--threads", "2", "metrics", "--manifest", str(manifest)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert set(report) == {"pairs", "mean"}
        assert len(report["pairs"]) == 2
        assert report["mean"]["mcd"] == 0.0

    def test_bench_schema(self, tiny_ckpt, capsys):
        assert main([
            "bench", str(tiny_ckpt), "--seconds", "0.05", "--runs", "3", "--warmup", "1",
        ]) == 0
        report = json.loads(capsys.readouterr().out)
        assert set(report) == {
            "variant", "params", "params_million", "frames", "samples",
            "seconds_audio", "warmup_runs", "measured_runs", "times_s", "rtf_median",
        }
        assert report["variant"] == "tiny"
        assert report["rtf_median"] > 0
        assert len(report["times_s"]) == 3
        assert report["samples"] == report["frames"] * 256

    def test_spec_dump_dimensions(self, tmp_path, wav_8192):
        out_csv = tmp_path / "spec.csv"
        assert main(["spec-dump", str(wav_8192), str(out_csv)]) == 0
        rows = out_csv.read_text().strip().split("\n")
        assert len(rows) == 513
        assert all(len(r.split(",")) == 32 for r in rows)

    def test_filter_dump_sections(self, tmp_path):
        out_csv = tmp_path / "filter.csv"
        assert main(["filter", "--m", "2", str(out_csv)]) == 0
        text = out_csv.read_text()
        taps_part, resp_part = text.split("\n\n")
        tap_rows = taps_part.strip().split("\n")
        assert tap_rows[0] == "index,tap"
        assert len(tap_rows) == 13  # header + 12 taps
        resp_rows = resp_part.strip().split("\n")
        assert resp_rows[0] == "freq_normalized,mag_db"
        assert len(resp_rows) == 4098  # header + 8192/2 + 1 bins

    def test_init_random_deterministic(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(TINY))
        p1, p2 = tmp_path / "a.bvgw", tmp_path / "b.bvgw"
        assert main(["--seed", "5", "--config", str(cfg_path), "init-random", "custom", str(p1)]) == 0
        assert main(["--seed", "5", "--config", str(cfg_path), "init-random", "custom", str(p2)]) == 0
        assert p1.read_bytes() == p2.read_bytes()

    def test_init_random_unknown_variant_exit_2(self, tmp_path):
        assert main(["init-random", "mystery", str(tmp_path / "x.bvgw")]) == 2
