import json
import math

import numpy as np
import pytest

from fracstable.cli import IngestSpec, fmt, ingest_table, main
from fracstable.errors import DomainError
from fracstable.fsd import FsdParams, fsd_pdf
from fracstable.gof import cell_probabilities_from_pdf
from fracstable.stable import StableParams, stable_pdf


def write(path, text):
    path.write_text(text)
    return str(path)


@pytest.fixture(scope="module")
def synthetic(tmp_path_factory):
    d = tmp_path_factory.mktemp("synthetic")
    path = d / "sample.txt"
    rc = main(["sample", "--alpha", "0.8", "--beta", "0.95", "--theta", "1", "--n", "100000", "--seed", "5", "--out", str(path)])
    assert rc == 0
    return path


@pytest.fixture(scope="module")
def fitted(synthetic, tmp_path_factory):
    d = tmp_path_factory.mktemp("fit")
    report, plot = d / "report.json", d / "plot.csv"
    rc = main(["fit", "--input", str(synthetic), "--seed", "3", "--out", str(report), "--plot-out", str(plot)])
    assert rc == 0
    table = np.loadtxt(plot, delimiter=",", skiprows=1)
    return json.loads(report.read_text()), table, report


class TestIngest:
    def test_header(self, tmp_path):
        r = ingest_table(IngestSpec(write(tmp_path / "a.csv", "x\n1.5\n2.5"), skip_header=True, column="x"))
        assert r.values.tolist() == [1.5, 2.5] and r.rows == 2

    def test_bad_cell_names_line(self, tmp_path):
        path = write(tmp_path / "a.csv", "x\n1.5\nabc\n2.0\n")
        with pytest.raises(DomainError, match=":3:"):
            ingest_table(IngestSpec(path, skip_header=True))

    def test_drop_nonpositive(self, tmp_path):
        r = ingest_table(IngestSpec(write(tmp_path / "a.csv", "x\n-1\n0\n2"), skip_header=True, drop_nonpositive=True))
        assert r.values.tolist() == [2.0] and r.dropped == 2

    def test_tab_and_index(self, tmp_path):
        r = ingest_table(IngestSpec(write(tmp_path / "a.tsv", "1\t10\n2\t20\n"), delimiter="tab", column=1))
        assert r.values.tolist() == [10.0, 20.0]

    def test_whitespace(self, tmp_path):
        r = ingest_table(IngestSpec(write(tmp_path / "a.txt", "a  b\n1  3\n\n2 4\n"), delimiter="whitespace", column="b", skip_header=True))
        assert r.values.tolist() == [3.0, 4.0]

    def test_missing_column(self, tmp_path):
        with pytest.raises(DomainError, match="not in header"):
            ingest_table(IngestSpec(write(tmp_path / "a.csv", "x\n1\n"), skip_header=True, column="y"))

    def test_short_row(self, tmp_path):
        with pytest.raises(DomainError, match=":2:"):
            ingest_table(IngestSpec(write(tmp_path / "a.csv", "1,2\n3\n"), column=1))

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            ingest_table(IngestSpec(str(tmp_path / "nope.csv")))

    def test_no_usable_rows(self, tmp_path):
        with pytest.raises(DomainError, match="no usable rows"):
            ingest_table(IngestSpec(write(tmp_path / "a.csv", "-1\n0\n"), drop_nonpositive=True))


class TestFormatting:
    @pytest.mark.parametrize("x,text", [(math.pi, "3.14159265"), (1e-20 / 3, "3.33333333e-21"), (2.0, "2")])
    def test_nine_digits(self, x, text):
        assert fmt(x) == text


class TestSample:
    def test_gaussian_variance(self, tmp_path):
        out = tmp_path / "g.txt"
        assert main(["sample", "--alpha", "2", "--beta", "1", "--theta", "0", "--lambda", "1", "--n", "1000000", "--out", str(out)]) == 0
        assert np.var(np.loadtxt(out)) == pytest.approx(2.0, abs=0.02)

    def test_zero_count_is_usage_error(self, capsys):
        assert main(["sample", "--alpha", "1", "--beta", "0.5", "--n", "0"]) == 2
        assert "positive integer" in capsys.readouterr().err

    def test_beta_out_of_range(self, capsys, tmp_path):
        out = tmp_path / "x.txt"
        assert main(["sample", "--alpha", "1", "--beta", "1.5", "--n", "5", "--out", str(out)]) == 3
        err = capsys.readouterr().err
        assert "0 < beta <= 1" in err and "stage 'setup'" in err
        assert not out.exists()

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        for p in (a, b):
            main(["sample", "--alpha", "1.3", "--beta", "0.6", "--n", "500", "--seed", "9", "--out", str(p)])
        assert a.read_bytes() == b.read_bytes()


class TestPdf:
    def test_beta_one_matches_stable(self, tmp_path):
        out = tmp_path / "q.csv"
        assert main(["pdf", "--alpha", "1.4", "--beta", "1", "--theta", "0.3", "--xmin", "-5", "--xmax", "5", "--points", "21", "--out", str(out)]) == 0
        t = np.loadtxt(out, delimiter=",", skiprows=1)
        assert np.allclose(t[:, 1], stable_pdf(t[:, 0], StableParams(1.4, 0.3)), atol=1e-6)

    def test_grid_integrates_to_one(self, tmp_path):
        out = tmp_path / "q.csv"
        args = ["pdf", "--alpha", "2", "--beta", "0.9", "--xmin", "-40", "--xmax", "40", "--points", "801", "--out", str(out)]
        assert main(args) == 0
        t = np.loadtxt(out, delimiter=",", skiprows=1)
        assert np.trapezoid(t[:, 1], t[:, 0]) == pytest.approx(1.0, abs=5e-3)

    def test_monte_carlo_method(self, tmp_path):
        out = tmp_path / "q.csv"
        args = ["pdf", "--alpha", "1.5", "--beta", "0.7", "--xmin", "1", "--xmax", "2", "--points", "3", "--method", "monte-carlo", "--mc-samples", "200000", "--out", str(out)]
        assert main(args) == 0
        t = np.loadtxt(out, delimiter=",", skiprows=1)
        assert np.allclose(t[:, 1], fsd_pdf(t[:, 0], FsdParams(1.5, 0.7, 0.0)), rtol=0.02)


class TestFit:
    def test_recovers_alpha(self, fitted):
        report, _, _ = fitted
        assert 0.7 <= report["params"]["alpha"] <= 0.9
        assert report["objective"] <= report["initial_objective"]

    def test_report_contents(self, fitted):
        report, _, _ = fitted
        assert report["seed"] == 3 and report["version"] == "0.1.0"
        assert report["gof"]["dof"] == 40 - 1 - 4
        assert report["gof"]["decision"] in ("accept", "reject")
        assert report["input"]["rows"] == 100000

    def test_numbers_have_nine_digits(self, fitted):
        _, _, path = fitted
        for token in path.read_text().replace(",", " ").split():
            token = token.strip('"[]{}:')
            try:
                float(token)
            except ValueError:
                continue
            mantissa = token.lower().split("e")[0].replace("-", "").replace(".", "").lstrip("0")
            assert len(mantissa) <= 9

    def test_plot_table(self, fitted):
        report, table, _ = fitted
        assert np.all(table[:, 1:] >= 0)
        edges = np.geomspace(*report["window"], report["bins"] + 1)
        assert np.sum(table[:, 1] * np.diff(edges)) == pytest.approx(1.0, abs=1e-2)

    def test_model_column_matches_density(self, fitted):
        report, table, _ = fitted
        p = report["params"]
        params = FsdParams(p["alpha"], p["beta"], p["theta"], p["lambda"])
        edges = np.geomspace(*report["window"], report["bins"] + 1)
        widths = np.diff(edges)
        rng = np.random.default_rng(0)
        idx = rng.choice(np.flatnonzero(table[:, 2] > 0), 10, replace=False)

        class Bins:
            pass

        m = report["mc_samples"]
        for i in idx:
            b = Bins()
            b.edges = edges[i : i + 2]
            prob = cell_probabilities_from_pdf(lambda x: fsd_pdf(x, params), b, nodes=16, conditional=False)[0]
            se = math.sqrt(prob * (1 - prob) / m) / widths[i]
            # 9-digit rounding of the fitted parameters is far below the MC error
            assert abs(table[i, 2] - prob / widths[i]) < 4 * se + 1e-9

    def test_byte_identical(self, synthetic, fitted, tmp_path):
        _, _, first = fitted
        again = tmp_path / "again.json"
        assert main(["fit", "--input", str(synthetic), "--seed", "3", "--out", str(again)]) == 0
        assert again.read_bytes() == first.read_bytes()

    def test_too_few_bins(self, synthetic, tmp_path, capsys):
        out = tmp_path / "r.json"
        assert main(["fit", "--input", str(synthetic), "--bins", "4", "--out", str(out)]) == 3
        assert "4 - 1 - 4" in capsys.readouterr().err
        assert not out.exists()

    def test_partial_output_removed(self, synthetic, tmp_path, capsys):
        out = tmp_path / "r.json"
        plot = tmp_path / "missing-dir" / "p.csv"
        args = ["fit", "--input", str(synthetic), "--max-evals", "5", "--mc-samples", "10000", "--out", str(out), "--plot-out", str(plot)]
        assert main(args) == 4
        assert "stage 'write'" in capsys.readouterr().err
        assert not out.exists()

    def test_missing_input(self, tmp_path, capsys):
        assert main(["fit", "--input", str(tmp_path / "none.csv")]) == 4
        assert "stage 'ingest'" in capsys.readouterr().err


class TestGof:
    def test_true_parameters(self, synthetic, tmp_path):
        out = tmp_path / "g.json"
        args = ["gof", "--input", str(synthetic), "--alpha", "0.8", "--beta", "0.95", "--theta", "1", "--xmin", "0.01", "--xmax", "20", "--mc-samples", "2000000", "--level", "0.01", "--out", str(out)]
        assert main(args) == 0
        report = json.loads(out.read_text())
        assert report["gof"]["dof"] == 39
        assert report["gof"]["decision"] == "accept"


class TestCtrw:
    def test_before_first_wait(self, tmp_path):
        out = tmp_path / "c.txt"
        assert main(["ctrw", "--alpha", "1.5", "--beta", "0.7", "--t", "0.5", "--n", "100", "--out", str(out)]) == 0
        assert np.all(np.loadtxt(out) == 0.0)

    def test_reference_curve(self, tmp_path):
        out, plot = tmp_path / "c.txt", tmp_path / "p.csv"
        args = ["ctrw", "--alpha", "1.5", "--beta", "0.7", "--t", "100", "--n", "2000", "--bins", "10", "--out", str(out), "--plot-out", str(plot)]
        assert main(args) == 0
        t = np.loadtxt(plot, delimiter=",", skiprows=1)
        assert t.shape == (10, 3) and np.all(t[:, 2] > 0)
        assert np.allclose(t[:, 0], -t[::-1, 0])
