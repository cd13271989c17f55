import json

import pytest

from softjpeg import training as tr
from softjpeg.cli import main
from softjpeg.codec import read_ppm, write_ppm
from softjpeg.losses import CSV_HEADER
from tests.conftest import make_natural_image


@pytest.fixture()
def workdir(tmp_path):
    img = make_natural_image(48, 64, seed=70)
    src = tmp_path / "in.ppm"
    write_ppm(src, img)
    return tmp_path, src, img


def test_encode_decode_cycle(workdir, capsys):
    tmp, src, img = workdir
    jpg = tmp / "out.jpg"
    back = tmp / "back.ppm"
    assert main(["encode", "--input", str(src), "--output", str(jpg), "--quality", "90"]) == 0
    out = capsys.readouterr().out
    assert "bpp=" in out and "time=" in out
    assert main(["decode", "--input", str(jpg), "--output", str(back),
                 "--reference", str(src)]) == 0
    out = capsys.readouterr().out
    assert "psnr=" in out
    psnr_value = float(out.split("psnr=")[1].split("dB")[0])
    assert psnr_value >= 32.0
    assert read_ppm(back).shape == img.shape


def test_inputs_are_never_mutated(workdir):
    tmp, src, _ = workdir
    original = src.read_bytes()
    main(["encode", "--input", str(src), "--output", str(tmp / "o.jpg"), "--quality", "50"])
    assert src.read_bytes() == original


def test_usage_errors_exit_1(workdir, capsys):
    tmp, src, _ = workdir
    assert main(["encode", "--input", str(src), "--output", str(tmp / "o.jpg"),
                 "--quality", "0"]) == 1
    assert main(["encode", "--input", str(src), "--output", str(tmp / "o.jpg")]) == 1
    assert main(["bogus-command"]) == 1
    assert main(["encode", "--input", str(src), "--output", str(tmp / "o.jpg"),
                 "--quality", "50", "--unknown-flag"]) == 1
    capsys.readouterr()


def test_missing_input_exits_2(workdir, capsys):
    tmp, _, _ = workdir
    code = main(["encode", "--input", str(tmp / "absent.ppm"),
                 "--output", str(tmp / "o.jpg"), "--quality", "50"])
    assert code == 2
    assert "I/O error" in capsys.readouterr().err


def test_malformed_jpeg_exits_3_with_diagnostic(workdir, capsys):
    tmp, src, _ = workdir
    jpg = tmp / "t.jpg"
    main(["encode", "--input", str(src), "--output", str(jpg), "--quality", "50"])
    data = jpg.read_bytes()
    jpg.write_bytes(data[: len(data) // 2])
    code = main(["decode", "--input", str(jpg), "--output", str(tmp / "x.ppm")])
    assert code == 3
    err = capsys.readouterr().err
    assert "invalid input data" in err


def test_non_jpeg_input_exits_3(workdir, capsys):
    tmp, src, _ = workdir
    code = main(["decode", "--input", str(src), "--output", str(tmp / "x.ppm")])
    assert code == 3
    assert "SOI" in capsys.readouterr().err


def test_reference_dimension_mismatch_exits_3(workdir, capsys):
    tmp, src, img = workdir
    jpg = tmp / "t.jpg"
    main(["encode", "--input", str(src), "--output", str(jpg), "--quality", "50"])
    from softjpeg.codec import write_ppm

    other = tmp / "other.ppm"
    write_ppm(other, img[: img.shape[0] // 2])
    code = main(["decode", "--input", str(jpg), "--output", str(tmp / "y.ppm"),
                 "--reference", str(other)])
    assert code == 3
    assert "differs" in capsys.readouterr().err


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli-train")
    data = tmp / "data"
    data.mkdir()
    write_ppm(data / "a.ppm", make_natural_image(96, 96, seed=71))
    config = {
        "steps": 1, "batch_size": 2, "patch_size": 32, "num_patches": 4,
        "hidden_size": 16, "kwta_k": 16, "seed": 2,
    }
    cfg_path = tmp / "config.json"
    cfg_path.write_text(json.dumps(config))
    ckpt = tmp / "model.ckpt"
    assert main(["train", "--data", str(data), "--config", str(cfg_path),
                 "--out", str(ckpt)]) == 0
    return tmp, ckpt


def test_train_produces_loadable_checkpoint(trained):
    _, ckpt = trained
    loaded = tr.load_checkpoint(ckpt)
    assert loaded.step == 1


def test_qtable_prints_128_values_in_range(trained, capsys):
    _, ckpt = trained
    assert main(["qtable", "--checkpoint", str(ckpt)]) == 0
    out = capsys.readouterr().out
    values = [int(v) for v in out.replace("luminance:", "").replace("chrominance:", "").split()]
    assert len(values) == 128
    assert all(1 <= v <= 255 for v in values)


def test_checkpoint_encode_is_decodable(trained, workdir, capsys):
    _, ckpt = trained
    tmp, src, img = workdir
    jpg = tmp / "learned.jpg"
    assert main(["encode", "--input", str(src), "--output", str(jpg),
                 "--checkpoint", str(ckpt)]) == 0
    assert main(["decode", "--input", str(jpg), "--output", str(tmp / "r.ppm")]) == 0
    assert read_ppm(tmp / "r.ppm").shape == img.shape
    capsys.readouterr()


def test_eval_writes_csv_with_schema_header(trained, tmp_path, capsys):
    tmp, ckpt = trained
    data = tmp_path / "eval-data"
    data.mkdir()
    write_ppm(data / "big.ppm", make_natural_image(184, 184, seed=72))
    csv_path = tmp_path / "m.csv"
    assert main(["eval", "--checkpoint", str(ckpt), "--data", str(data),
                 "--csv", str(csv_path)]) == 0
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 3
    capsys.readouterr()
