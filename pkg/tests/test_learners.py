import math
import random
from fractions import Fraction

import numpy as np
import pytest

from cryptohalal.corpus import (
    FEATURE_ORDER,
    CoinRecord,
    Dataset,
    FeatureId,
    Ruling,
    dataset_hash,
    synthesize_fixture,
)
from cryptohalal.featurex import FeatureVector
from cryptohalal.learners import (
    ModelChecksumError,
    ModelFormatError,
    ModelVersionError,
    PredictionError,
    TrainingError,
    fit_lr,
    fit_nb,
    fit_svm,
    load_model,
    lr_gradient,
    lr_loss,
    predict,
    save_model,
    svm_objective,
    train,
    train_lr,
    train_nb,
    train_svm,
)


def _vec(**flags):
    base = {f: 0 for f in FEATURE_ORDER}
    for name, v in flags.items():
        base[FeatureId(name)] = v
    return tuple(base[f] for f in FEATURE_ORDER)


def _rec(ticker, ruling, **flags):
    return CoinRecord(ticker=ticker, name=ticker, features=_vec(**flags), ruling=ruling)


def _pad(bits, width=18):
    """Embed a short 0/1 pattern into an 18-wide row (rest zero)."""
    return list(bits) + [0] * (width - len(bits))


def _tiny_dataset():
    """8 records whose first 4 features carry all the signal."""
    rows = [
        ((1, 1, 0, 0), Ruling.HALAL, "HALA"),
        ((1, 0, 1, 0), Ruling.HALAL, "HALB"),
        ((0, 1, 0, 0), Ruling.HALAL, "HALC"),
        ((1, 1, 1, 0), Ruling.HALAL, "HALD"),
        ((0, 0, 0, 1), Ruling.HARAM, "HRMA"),
        ((0, 1, 0, 1), Ruling.HARAM, "HRMB"),
        ((0, 0, 1, 1), Ruling.HARAM, "HRMC"),
        ((1, 0, 0, 1), Ruling.HARAM, "HRMD"),
    ]
    return Dataset(records=tuple(
        CoinRecord(ticker=t, name=t, features=tuple(_pad(bits)), ruling=r)
        for bits, r, t in rows
    ))


class TestNaiveBayes:
    def test_brute_force_posterior_oracle(self):
        """Exact-arithmetic NB posterior over every input in a 4-bit cube."""
        d = _tiny_dataset()
        model = train_nb(d, alpha=1.0)
        X, y = d.to_arrays()
        n = len(y)
        classes = {0: [x for x, lbl in zip(X, y) if lbl == 0],
                   1: [x for x, lbl in zip(X, y) if lbl == 1]}

        def log_posterior(cls, x):
            rows = classes[cls]
            nc = len(rows)
            total = math.log(Fraction(nc, n))
            for j in range(18):
                count = sum(r[j] for r in rows)
                p1 = Fraction(count + 1, nc + 2)
                total += math.log(p1 if x[j] else 1 - p1)
            return total

        for bits in range(16):
            x = _pad([(bits >> k) & 1 for k in range(4)])
            expected = log_posterior(1, x) - log_posterior(0, x)
            got = predict(model, x)
            assert got.score == pytest.approx(expected, abs=1e-12)
            assert got.label is (Ruling.HARAM if expected >= 0 else Ruling.HALAL)

    def test_tie_goes_to_haram(self):
        # identical feature rows in both classes: margin is exactly zero
        d = Dataset(records=(
            _rec("AAA", Ruling.HALAL, PoW=1),
            _rec("BBB", Ruling.HARAM, PoW=1),
        ))
        model = train_nb(d)
        p = predict(model, _vec(PoW=1))
        assert p.score == 0.0
        assert p.label is Ruling.HARAM

    def test_alpha_validation(self):
        with pytest.raises(TrainingError):
            train_nb(_tiny_dataset(), alpha=0.0)

    def test_single_class_rejected(self):
        d = Dataset(records=(_rec("AAA", Ruling.HALAL, PoW=1),))
        with pytest.raises(TrainingError):
            train_nb(d)


class TestLogisticRegression:
    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        X = rng.integers(0, 2, size=(30, 18)).astype(float)
        y = rng.integers(0, 2, size=30).astype(float)
        lam = 1e-3
        h = 1e-6
        worst = 0.0
        for _ in range(20):
            w = rng.normal(size=18)
            b = float(rng.normal())
            gw, gb = lr_gradient(w, b, X, y, lam)
            for j in list(rng.choice(18, size=4, replace=False)) + ["b"]:
                if j == "b":
                    f1 = lr_loss(w, b + h, X, y, lam)
                    f0 = lr_loss(w, b - h, X, y, lam)
                    analytic = gb
                else:
                    e = np.zeros(18)
                    e[j] = h
                    f1 = lr_loss(w + e, b, X, y, lam)
                    f0 = lr_loss(w - e, b, X, y, lam)
                    analytic = gw[j]
                numeric = (f1 - f0) / (2 * h)
                rel = abs(numeric - analytic) / max(1.0, abs(analytic))
                worst = max(worst, rel)
        assert worst < 1e-5

    def test_loss_decreases_monotonically(self):
        X, y = _tiny_dataset().to_arrays()
        res = fit_lr(X, y, lam=1e-4)
        assert res.converged
        losses = res.history
        assert all(b < a for a, b in zip(losses, losses[1:]))

    def test_separable_data_fits(self):
        d = _tiny_dataset()
        model = train_lr(d)
        for rec in d:
            assert predict(model, rec.features).label is rec.ruling

    def test_score_is_probability(self):
        model = train_lr(_tiny_dataset())
        p = predict(model, _vec(Margin=1))
        assert 0.0 <= p.score <= 1.0

    def test_unpenalized_intercept(self):
        # heavy ridge shrinks w but the intercept still tracks the base rate
        rows = [_rec(f"H{i:03d}", Ruling.HARAM, Margin=1) for i in range(9)]
        rows.append(_rec("HALX", Ruling.HALAL, PoW=1))
        X, y = Dataset(records=tuple(rows)).to_arrays()
        res = fit_lr(X, y, lam=100.0)
        assert res.converged
        w = np.asarray(res.params["weights"])
        assert float(np.max(np.abs(w))) < 1e-3
        assert 1 / (1 + math.exp(-res.params["intercept"])) == pytest.approx(0.9, abs=0.01)


SEPARABLE_X = [[4, 1], [5, 2], [6, 1], [0, 0], [-1, 1], [-2, 0]]
SEPARABLE_Y = [1, 1, 1, 0, 0, 0]


class TestSvm:
    def test_reaches_exact_optimum_on_separable_set(self):
        """Hand-derived max-margin solution: w = (8/17, 2/17), b = -1."""
        res = fit_svm(SEPARABLE_X, SEPARABLE_Y, C=1.0)
        w = np.asarray(res.params["weights"])
        b = res.params["bias"]
        assert w == pytest.approx([8 / 17, 2 / 17], abs=1e-9)
        assert b == pytest.approx(-1.0, abs=1e-9)

    def test_zero_hinge_on_separable_set(self):
        res = fit_svm(SEPARABLE_X, SEPARABLE_Y, C=1.0)
        w = np.asarray(res.params["weights"])
        b = res.params["bias"]
        yy = np.where(np.asarray(SEPARABLE_Y) == 1, 1.0, -1.0)
        margins = yy * (np.asarray(SEPARABLE_X, dtype=float) @ w + b)
        assert float(np.max(1.0 - margins)) <= 1e-6

    def test_best_iterate_objective_never_increases(self):
        X, y = _tiny_dataset().to_arrays()
        res = fit_svm(X, y)
        hist = res.history
        assert all(b <= a for a, b in zip(hist, hist[1:]))

    def test_polish_never_hurts(self):
        # final recorded objective must match the returned parameters
        X, y = _tiny_dataset().to_arrays()
        res = fit_svm(X, y, C=2.0)
        w = np.asarray(res.params["weights"])
        yy = np.where(np.asarray(y) == 1, 1.0, -1.0)
        obj = svm_objective(w, res.params["bias"], np.asarray(X, dtype=float), yy, 2.0)
        assert obj == pytest.approx(res.history[-1], rel=1e-12)

    def test_fixture_dataset_fits(self, fixture_dataset):
        model = train_svm(fixture_dataset)
        wrong = sum(
            1 for rec in fixture_dataset
            if predict(model, rec.features).label is not rec.ruling
        )
        assert wrong <= 2


class TestTrainingInterface:
    def test_train_dispatch(self, fixture_dataset):
        for kind in ("nb", "lr", "svm"):
            m = train(fixture_dataset, kind)
            assert m.kind == kind
            assert m.dataset_hash == dataset_hash(fixture_dataset)
            assert m.feature_names == tuple(f.value for f in FEATURE_ORDER)

    def test_train_unknown_kind(self, fixture_dataset):
        with pytest.raises(TrainingError):
            train(fixture_dataset, "forest")

    def test_row_order_invariance_bit_exact(self, fixture_dataset):
        """Shuffling the training records must not change any parameter."""
        rng = random.Random(13)
        indices = list(range(len(fixture_dataset)))
        rng.shuffle(indices)
        shuffled = fixture_dataset.subset(indices)
        for kind in ("nb", "lr", "svm"):
            a = train(fixture_dataset, kind)
            b = train(shuffled, kind)
            assert a.params == b.params


class TestPredict:
    def test_accepts_feature_vector_and_sequence(self, fixture_dataset):
        model = train_nb(fixture_dataset)
        fv = FeatureVector.from_values(_vec(Margin=1))
        assert predict(model, fv) == predict(model, _vec(Margin=1))

    def test_rejects_wrong_width(self, fixture_dataset):
        model = train_nb(fixture_dataset)
        with pytest.raises(PredictionError):
            predict(model, [0] * 17)

    def test_rejects_non_binary(self, fixture_dataset):
        model = train_nb(fixture_dataset)
        with pytest.raises(PredictionError):
            predict(model, [0.5] + [0] * 17)

    def test_lr_threshold_at_half(self, fixture_dataset):
        model = train_lr(fixture_dataset)
        for rec in fixture_dataset:
            p = predict(model, rec.features)
            assert p.label is (Ruling.HARAM if p.score >= 0.5 else Ruling.HALAL)


class TestModelFile:
    def test_roundtrip(self, tmp_path, fixture_dataset):
        for kind in ("nb", "lr", "svm"):
            m = train(fixture_dataset, kind)
            p = tmp_path / f"{kind}.chm"
            save_model(m, p)
            again = load_model(p)
            assert again == m

    def test_file_layout(self, tmp_path, fixture_dataset):
        p = tmp_path / "m.chm"
        save_model(train_nb(fixture_dataset), p)
        lines = p.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "CHMODEL1"
        assert len(lines[1]) == 64
        assert lines[2].startswith("{")

    def test_tampered_payload(self, tmp_path, fixture_dataset):
        p = tmp_path / "m.chm"
        save_model(train_nb(fixture_dataset), p)
        text = p.read_text(encoding="utf-8")
        p.write_text(text.replace('"nb"', '"lr"'), encoding="utf-8")
        with pytest.raises(ModelChecksumError):
            load_model(p)

    def test_truncated_file(self, tmp_path, fixture_dataset):
        p = tmp_path / "m.chm"
        save_model(train_nb(fixture_dataset), p)
        data = p.read_bytes()
        p.write_bytes(data[: len(data) - 20])
        with pytest.raises(ModelChecksumError):
            load_model(p)

    def test_wrong_magic(self, tmp_path, fixture_dataset):
        p = tmp_path / "m.chm"
        save_model(train_nb(fixture_dataset), p)
        text = p.read_text(encoding="utf-8").replace("CHMODEL1", "CHMODEL9")
        p.write_text(text, encoding="utf-8")
        with pytest.raises(ModelVersionError):
            load_model(p)

    def test_not_a_model_file(self, tmp_path):
        p = tmp_path / "m.chm"
        p.write_text("just text\n", encoding="utf-8")
        with pytest.raises(ModelFormatError):
            load_model(p)

    def test_save_is_deterministic(self, tmp_path, fixture_dataset):
        m = train_svm(fixture_dataset)
        p1, p2 = tmp_path / "a.chm", tmp_path / "b.chm"
        save_model(m, p1)
        save_model(m, p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestCrossModelAgreement:
    def test_all_three_agree_on_clear_cases(self, fixture_dataset):
        models = [train(fixture_dataset, k) for k in ("nb", "lr", "svm")]
        clear_haram = _vec(Margin=1, Lending=1, Borrowing=1, Leverage=1)
        clear_halal = _vec(PoW=1, Technical_Project=1)
        for m in models:
            assert predict(m, clear_haram).label is Ruling.HARAM
            assert predict(m, clear_halal).label is Ruling.HALAL
