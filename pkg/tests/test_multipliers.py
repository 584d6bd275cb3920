import numpy as np
import pytest

from relustab import (
    assignment_violations,
    cop0_family,
    copositive_family,
    diag_sector_family,
    family_sum,
    pointwise_iqc_value,
    polytopic_family,
    relu,
    sample_assignment,
    zames_falb_family,
    zero_family,
)

ALL_FAMILIES = [zames_falb_family, polytopic_family, diag_sector_family,
                copositive_family, cop0_family]


def max_violation(family, assignment) -> float:
    return max(assignment_violations(family, assignment).values(),
               default=0.0)


class TestZamesFalb:
    def test_relu_sector_identity(self, rng):
        # For (mu, nu) = (0, 1) the conjugated form collapses to
        # [[0, M'], [M, -(M + M')]].
        m = 3
        fam = zames_falb_family(m)
        M = rng.standard_normal((m, m))
        pi = fam.pi({"M": M})
        expected = np.block([[np.zeros((m, m)), M.T], [M, -(M + M.T)]])
        np.testing.assert_allclose(pi, expected, atol=1e-14)

    def test_general_sector_expansion(self, rng):
        # Expanding T' [[0, M'], [M, 0]] T with T = [[nu I, -I], [-mu I, I]]
        # gives [[-mu nu (M + M'), nu M' + mu M], [mu M' + nu M, -(M + M')]].
        m, mu, nu = 2, -0.3, 2.0
        fam = zames_falb_family(m, mu=mu, nu=nu)
        M = rng.standard_normal((m, m))
        pi = fam.pi({"M": M})
        expected = np.block([
            [-mu * nu * (M + M.T), nu * M.T + mu * M],
            [mu * M.T + nu * M, -(M + M.T)],
        ])
        np.testing.assert_allclose(pi, expected, atol=1e-14)

    def test_doubly_hyperdominant_membership(self):
        fam = zames_falb_family(2)
        assert max_violation(fam, {"M": np.eye(2)}) == 0.0
        # positive off-diagonal entry
        bad_off = {"M": np.array([[1.0, 0.1], [0.0, 1.0]])}
        report = assignment_violations(fam, bad_off)
        assert report["constraint:offdiag_nonpos"] > 0.0
        # negative row/column sums
        bad_sum = {"M": np.array([[1.0, -2.0], [-2.0, 1.0]])}
        report = assignment_violations(fam, bad_sum)
        assert report["constraint:row_sums_nonneg"] > 0.0
        assert report["constraint:col_sums_nonneg"] > 0.0

    def test_scalar_case(self):
        fam = zames_falb_family(1)
        assert max_violation(fam, {"M": np.array([[2.0]])}) == 0.0
        assert assignment_violations(
            fam, {"M": np.array([[-1.0]])})["constraint:row_sums_nonneg"] > 0

    def test_rejects_sectors_excluding_relu(self):
        with pytest.raises(ValueError):
            zames_falb_family(2, mu=0.5)
        with pytest.raises(ValueError):
            zames_falb_family(2, nu=-1.0)

    def test_pointwise_zero_at_kink(self):
        # M = I, xi = (1, -1): contributions vanish because the ReLU graph
        # makes zeta (zeta - xi) = 0 componentwise.
        fam = zames_falb_family(2)
        pi = fam.pi({"M": np.eye(2)})
        assert pointwise_iqc_value(pi, np.array([1.0, -1.0])) == \
            pytest.approx(0.0, abs=1e-14)


class TestPolytopic:
    def test_hand_case_m1(self):
        # (X, Y, Z) = (1, -0.4, -0.1): vertex values X = 1 at delta = 0 and
        # X + 2Y + Z = 0.1 at delta = 1; both nonnegative, diag(Z) <= 0.
        fam = polytopic_family(1)
        asn = {"X": np.array([[1.0]]), "Y": np.array([[-0.4]]),
               "Z": np.array([[-0.1]])}
        report = assignment_violations(fam, asn)
        assert max(report.values()) == 0.0
        pi = fam.pi(asn)
        np.testing.assert_allclose(pi, [[1.0, -0.4], [-0.4, -0.1]])
        assert pointwise_iqc_value(pi, np.array([1.0])) == pytest.approx(0.1)
        assert pointwise_iqc_value(pi, np.array([-1.0])) == pytest.approx(1.0)

    def test_vertex_constraint_count(self):
        for m in (1, 2, 4):
            fam = polytopic_family(m)
            assert len(fam.constraints) == 1 + 2 ** m

    def test_vertex_violation_detected(self):
        fam = polytopic_family(1)
        # X + 2Y + Z = -0.5 < 0 violates the delta = 1 vertex.
        asn = {"X": np.array([[1.0]]), "Y": np.array([[-0.7]]),
               "Z": np.array([[-0.1]])}
        report = assignment_violations(fam, asn)
        assert report["constraint:vertex_1"] == pytest.approx(0.5)
        # positive diagonal of Z
        asn = {"X": np.array([[1.0]]), "Y": np.array([[0.0]]),
               "Z": np.array([[0.2]])}
        assert assignment_violations(
            fam, asn)["constraint:z_diag_nonpos"] == pytest.approx(0.2)

    def test_guards(self):
        with pytest.raises(ValueError):
            polytopic_family(13)
        with pytest.raises(ValueError):
            polytopic_family(2, alpha=0.1)
        with pytest.raises(ValueError):
            polytopic_family(2, beta=-0.1)

    def test_box_validity_from_vertices(self, rng):
        # Vertex certificates plus concavity in each delta entry cover the
        # whole box, hence every ReLU activation pattern.
        fam = polytopic_family(3)
        asn = sample_assignment(fam, rng)
        assert max_violation(fam, asn) <= 1e-12
        pi = fam.pi(asn)
        vals = pointwise_iqc_value(pi, rng.standard_normal((500, 3)))
        assert vals.min() >= -1e-10


class TestDiagSector:
    def test_pi_structure(self):
        fam = diag_sector_family(2, alpha=-1.0, beta=2.0)
        d = np.array([1.0, 3.0])
        D = np.diag(d)
        pi = fam.pi({"d": d})
        expected = np.block([[2.0 * D, 0.5 * D], [0.5 * D, -D]])
        np.testing.assert_allclose(pi, expected)

    def test_relu_value_exactly_zero(self, rng):
        # In the [0, 1] sector each channel contributes
        # d_i * zeta_i (xi_i - zeta_i), which vanishes on the ReLU graph.
        fam = diag_sector_family(4)
        pi = fam.pi(sample_assignment(fam, rng))
        vals = pointwise_iqc_value(pi, rng.standard_normal((200, 4)))
        np.testing.assert_allclose(vals, 0.0, atol=1e-12)

    def test_contained_in_polytopic_closure(self, rng):
        # A diagonal-sector member maps onto polytopic blocks
        # (X, Y, Z) = (-alpha beta D, mid D, -D) satisfying every vertex
        # constraint with equality at the sector endpoints.
        m = 3
        ds = diag_sector_family(m)
        pol = polytopic_family(m)
        d = sample_assignment(ds, rng)["d"]
        D = np.diag(d)
        asn = {"X": 0.0 * D, "Y": 0.5 * D, "Z": -D}
        report = assignment_violations(pol, asn)
        assert max(report.values()) <= 1e-12
        np.testing.assert_allclose(pol.pi(asn), ds.pi({"d": d}), atol=1e-14)

    def test_negative_scaling_flagged(self):
        fam = diag_sector_family(2)
        report = assignment_violations(fam, {"d": np.array([1.0, -0.5])})
        assert report["block:d"] == pytest.approx(0.5)


class TestCopositive:
    def test_inner_signal_nonnegative(self, rng):
        # R [xi; relu(xi)] = [relu(xi) - xi; relu(xi)] >= 0 for every xi.
        xi = rng.standard_normal(6)
        stacked = np.concatenate([relu(xi) - xi, relu(xi)])
        assert np.all(stacked >= 0.0)

    def test_pi_form(self, rng):
        m = 2
        fam = copositive_family(m)
        asn = sample_assignment(fam, rng)
        eye = np.eye(m)
        R = np.block([[-eye, eye], [np.zeros((m, m)), eye]])
        np.testing.assert_allclose(
            fam.pi(asn), R.T @ (asn["Q1"] + asn["Q2"]) @ R, atol=1e-12)

    def test_cone_violations_detected(self):
        fam = copositive_family(1)
        report = assignment_violations(
            fam, {"Q1": -np.eye(2), "Q2": np.zeros((2, 2))})
        assert report["block:Q1"] == pytest.approx(1.0)
        report = assignment_violations(
            fam, {"Q1": np.eye(2), "Q2": np.array([[0.0, -1.0], [-1.0, 0.0]])})
        assert report["block:Q2"] == pytest.approx(1.0)

    def test_cop0_is_output_restricted_copositive(self, rng):
        # Embedding the cop0 blocks as blkdiag(0, Qhat) reproduces the same
        # multiplier through the full copositive map: R' blkdiag(0, Q) R =
        # blkdiag(0, Q).
        m = 3
        c0 = cop0_family(m)
        cf = copositive_family(m)
        asn0 = sample_assignment(c0, rng)
        zero = np.zeros((m, m))
        asn = {"Q1": np.block([[zero, zero], [zero, asn0["Q1"]]]),
               "Q2": np.block([[zero, zero], [zero, asn0["Q2"]]])}
        np.testing.assert_allclose(c0.pi(asn0), cf.pi(asn), atol=1e-14)

    def test_cop0_pi_zero_on_input_block(self, rng):
        m = 2
        fam = cop0_family(m)
        pi = fam.pi(sample_assignment(fam, rng))
        np.testing.assert_array_equal(pi[:m, :m], np.zeros((m, m)))
        np.testing.assert_array_equal(pi[:m, m:], np.zeros((m, m)))


class TestFamilySum:
    def test_pi_adds(self, rng):
        m = 2
        zf = zames_falb_family(m)
        ds = diag_sector_family(m)
        total = family_sum([zf, ds])
        a_zf = sample_assignment(zf, rng)
        a_ds = sample_assignment(ds, rng)
        merged = {f"f0.{k}": v for k, v in a_zf.items()}
        merged.update({f"f1.{k}": v for k, v in a_ds.items()})
        np.testing.assert_allclose(total.pi(merged),
                                   zf.pi(a_zf) + ds.pi(a_ds), atol=1e-13)

    def test_blocks_and_constraints_namespaced(self):
        total = family_sum([zames_falb_family(2), polytopic_family(2)])
        names = {b.name for b in total.blocks}
        assert names == {"f0.M", "f1.X", "f1.Y", "f1.Z"}
        connames = {c.name for c in total.constraints}
        assert "f0.offdiag_nonpos" in connames
        assert "f1.vertex_0" in connames

    def test_sampler_composes(self, rng):
        total = family_sum([zames_falb_family(2), cop0_family(2)])
        asn = sample_assignment(total, rng)
        assert set(asn) == {b.name for b in total.blocks}
        assert max_violation(total, asn) <= 1e-12

    def test_channel_mismatch_rejected(self):
        with pytest.raises(ValueError):
            family_sum([zames_falb_family(2), diag_sector_family(3)])
        with pytest.raises(ValueError):
            family_sum([])

    def test_zero_identity(self, rng):
        m = 2
        total = family_sum([zero_family(m), diag_sector_family(m)])
        d = sample_assignment(diag_sector_family(m), rng)["d"]
        np.testing.assert_allclose(total.pi({"f1.d": d}),
                                   diag_sector_family(m).pi({"d": d}))


class TestPointwiseIqc:
    def test_input_validation(self):
        with pytest.raises(ValueError):
            pointwise_iqc_value(np.zeros((3, 3)), np.zeros(1))
        with pytest.raises(ValueError):
            pointwise_iqc_value(np.zeros((4, 4)), np.zeros(3))

    def test_zero_family(self):
        fam = zero_family(3)
        pi = fam.pi(sample_assignment(fam, np.random.default_rng(0)))
        np.testing.assert_array_equal(pi, np.zeros((6, 6)))
        assert pointwise_iqc_value(pi, np.ones(3)) == 0.0

    def test_batch_matches_single(self, rng):
        fam = zames_falb_family(2)
        pi = fam.pi(sample_assignment(fam, rng))
        X = rng.standard_normal((10, 2))
        batch = pointwise_iqc_value(pi, X)
        singles = [pointwise_iqc_value(pi, x) for x in X]
        np.testing.assert_allclose(batch, singles, atol=1e-13)

    @pytest.mark.parametrize("factory", ALL_FAMILIES)
    def test_sampled_assignments_satisfy_iqc(self, factory, rng):
        # Smaller version of the acceptance-scale property: every sampled
        # member yields nonnegative values on the ReLU graph.
        fam = factory(2)
        for _ in range(10):
            asn = sample_assignment(fam, rng)
            assert max_violation(fam, asn) <= 1e-10
            pi = fam.pi(asn)
            vals = pointwise_iqc_value(pi, rng.standard_normal((200, 2)))
            assert vals.min() >= -1e-10


def test_missing_block_rejected():
    fam = zames_falb_family(2)
    with pytest.raises(KeyError):
        fam.pi({})
    with pytest.raises(KeyError):
        assignment_violations(fam, {})


def test_block_shape_checked():
    fam = zames_falb_family(2)
    with pytest.raises(ValueError):
        assignment_violations(fam, {"M": np.eye(3)})


def test_sampler_required():
    fam = zames_falb_family(2)
    stripped = type(fam)(name=fam.name, m=fam.m, blocks=fam.blocks,
                         constraints=fam.constraints, pi_map=fam.pi_map,
                         sampler=None)
    with pytest.raises(ValueError):
        sample_assignment(stripped, np.random.default_rng(0))
