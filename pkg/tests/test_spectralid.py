import numpy as np
import pytest

import glkit.graphcore as gc
import glkit.simulate as sim
import glkit.spectralid as sid
from glkit.errors import Infeasible, SingularInputCovariance, TooLarge
from glkit.metrics import scale_aligned_error
from glkit.solvers import ShiftConstraintSet


def diffused_basis(G, h=(1.0, 0.5, 0.2)):
    return gc.eigendecompose(sim.diffusion_covariance(G, list(h)))


class TestEstimateEigenbasis:
    def test_exact_covariance_shares_eigenvectors(self):
        S = np.array([[0.0, 1.0], [1.0, 0.0]])
        Sigma = (np.eye(2) + S) @ (np.eye(2) + S)
        basis, flags = sid.estimate_eigenbasis(Sigma)
        np.testing.assert_allclose(np.abs(basis.vecs),
                                   np.abs(np.array([[1, 1], [1, -1]])
                                          / np.sqrt(2)), atol=1e-12)
        assert not flags.any()

    def test_identity_covariance_fully_degenerate(self):
        basis, flags = sid.estimate_eigenbasis(np.eye(5))
        assert flags.all()

    def test_subspace_distance_shrinks_with_samples(self):
        G = sim.gen_er_graph(8, 0.4, rng=0, require_connected=True)
        h = [1.0, 0.5]
        true_basis = diffused_basis(G, h)
        top = true_basis.vecs[:, -4:]  # span of the 4 strongest modes
        meds = []
        for p in (100, 1000, 10000):
            dists = []
            for seed in range(10):
                X = sim.gen_diffusion(G, h, p, rng=100 + seed)
                basis, _ = sid.estimate_eigenbasis(X)
                M = top.T @ basis.vecs[:, -4:]
                # sine of the largest principal angle between the spans
                dists.append(np.sqrt(max(0.0, 1 - np.min(
                    np.linalg.svd(M, compute_uv=False)) ** 2)))
            meds.append(np.median(dists))
        assert meds[0] > meds[1] > meds[2]


class TestInferShift:
    def test_two_cycle(self):
        basis = gc.eigendecompose(np.array([[0.0, 1.0], [1.0, 0.0]]))
        S, lam, trace = sid.infer_shift(basis)
        np.testing.assert_allclose(S, [[0, 1], [1, 0]], atol=1e-8)

    def test_identity_basis_infeasible(self):
        with pytest.raises(Infeasible):
            sid.infer_shift(np.eye(3))

    def test_exact_recovery_er_graph(self):
        G = sim.gen_er_graph(10, 0.3, rng=5, require_connected=True)
        basis = diffused_basis(G)
        S, lam, trace = sid.infer_shift(basis)
        c = np.trace(S.T @ G.data) / np.linalg.norm(S) ** 2
        assert np.abs(c * S - G.data).max() <= 1e-6

    def test_laplacian_constraint_set(self):
        # the l1 criterion is constant on the trace-normalized Laplacian
        # set (||S||_1 = 2 trace), so recovery is only up to the feasible
        # tie set; the output must still be feasible and exactly
        # diagonalized by the prescribed basis
        G = sim.gen_er_graph(7, 0.5, rng=6, require_connected=True)
        L = gc.laplacian_from_weights(G.data)
        Sigma = sim.diffusion_covariance(L, [1.0, 0.3])
        basis = gc.eigendecompose(Sigma)
        cset = ShiftConstraintSet(kind="laplacian")
        S, lam, trace = sid.infer_shift(basis, cset)
        assert cset.violation(S) <= 1e-6
        off = basis.vecs.T @ S @ basis.vecs
        off = off - np.diag(np.diag(off))
        assert np.abs(off).max() <= 1e-6
        assert np.trace(S) == pytest.approx(7.0, abs=1e-6)


class TestInferShiftPartial:
    def test_full_basis_reduces_to_exact(self):
        G = sim.gen_er_graph(8, 0.4, rng=7, require_connected=True)
        basis = diffused_basis(G)
        S_full, _, _ = sid.infer_shift(basis)
        S_part, _ = sid.infer_shift_partial(basis.vecs)
        assert np.abs(S_full - S_part).max() <= 1e-6

    def test_empty_basis_gives_sparsest_member(self):
        S, _ = sid.infer_shift_partial(np.zeros((5, 0)))
        assert np.abs(S).sum() == pytest.approx(2.0, abs=1e-6)

    def test_more_eigenvectors_help(self):
        errs = {2: [], 4: []}
        for seed in range(20):
            G = sim.gen_er_graph(6, 0.5, rng=400 + seed, require_connected=True)
            Sigma = sim.diffusion_covariance(G, [1.0, 0.5, 0.2])
            basis = gc.eigendecompose(Sigma)
            order = np.argsort(-np.abs(basis.vals))  # leading covariance modes
            for k in (2, 4):
                keep = basis.vecs[:, order[:k]]
                try:
                    S, _ = sid.infer_shift_partial(keep)
                except Infeasible:
                    errs[k].append(1.0)
                    continue
                errs[k].append(scale_aligned_error(S, G.data))
        assert np.median(errs[4]) <= np.median(errs[2])


class TestPsdFilterRecover:
    def test_worked_example(self):
        H = sid.psd_filter_recover([[5.0, 4.0], [4.0, 5.0]], np.eye(2)).H
        np.testing.assert_allclose(H, [[2, 1], [1, 2]], atol=1e-10)

    def test_trivial_and_scalar_cases(self):
        rng = np.random.default_rng(8)
        M = rng.standard_normal((4, 4))
        Sw = M @ M.T + np.eye(4)
        np.testing.assert_allclose(sid.psd_filter_recover(Sw, Sw).H, np.eye(4),
                                   atol=1e-9)
        np.testing.assert_allclose(sid.psd_filter_recover(4 * Sw, Sw).H,
                                   2 * np.eye(4), atol=1e-9)

    def test_reconstructs_output_covariance(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            n = 6
            Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
            H = (Q * rng.uniform(0.2, 3.0, n)) @ Q.T
            M = rng.standard_normal((n, n))
            Sw = M @ M.T + np.eye(n)
            Sx = H @ Sw @ H.T
            est = sid.psd_filter_recover(Sx, Sw)
            assert est.psd
            assert np.linalg.norm(est.H @ Sw @ est.H.T - Sx) <= 1e-8 * \
                np.linalg.norm(Sx)
            assert np.linalg.norm(est.H - H) <= 1e-8 * np.linalg.norm(H)

    def test_singular_input_rejected(self):
        with pytest.raises(SingularInputCovariance):
            sid.psd_filter_recover(np.eye(3), np.diag([1.0, 1.0, 0.0]))


class TestPsdFilterLs:
    def test_single_process_matches_closed_form(self):
        rng = np.random.default_rng(10)
        Q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        H = (Q * rng.uniform(0.5, 2.0, 5)) @ Q.T
        M = rng.standard_normal((5, 5))
        Sw = M @ M.T + np.eye(5)
        Sx = H @ Sw @ H.T
        ls = sid.psd_filter_ls([Sx], [Sw])
        closed = sid.psd_filter_recover(Sx, Sw)
        assert np.abs(ls.H - closed.H).max() <= 1e-6

    def test_identity_everything(self):
        est = sid.psd_filter_ls([np.eye(3)], [np.eye(3)])
        np.testing.assert_allclose(est.H, np.eye(3), atol=1e-8)

    def test_joint_fit_beats_single_process_plugins(self):
        rng = np.random.default_rng(11)
        n = 4
        Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        H = (Q * rng.uniform(0.5, 2.0, n)) @ Q.T
        Sw = [np.eye(n), np.diag(rng.uniform(0.5, 3.0, n))]
        # noisy output covariances
        Sx = []
        for k in range(2):
            E = 0.05 * rng.standard_normal((n, n))
            Sx.append(H @ Sw[k] @ H.T + E @ E.T)
        joint = sid.psd_filter_ls(Sx, Sw)

        def objective(Hc):
            tot = 0.0
            for k in range(2):
                Qk = sid.sqrt_psd(Sw[k])
                Rk = sid.sqrt_psd(Qk @ Sx[k] @ Qk)
                tot += 0.5 * np.linalg.norm(Rk - Qk @ Hc @ Qk) ** 2
            return tot

        for k in range(2):
            single = sid.psd_filter_recover(Sx[k], Sw[k])
            assert objective(joint.H) <= objective(single.H) + 1e-9


class TestSymFilterSelect:
    def test_two_node_sign_recovery(self):
        H = np.array([[2.0, 1.0], [1.0, 2.0]])
        Sw = [np.eye(2), np.diag([1.0, 4.0])]
        Sx = [H @ S @ H.T for S in Sw]
        est, signs, info = sid.sym_filter_select(Sx, Sw)
        assert np.abs(est.H - H).max() <= 1e-8
        assert info["identifiable"]

    def test_indefinite_filter_recovered_up_to_sign(self):
        rng = np.random.default_rng(12)
        n = 5
        Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        H = (Q * np.array([1.5, -0.7, 2.0, -1.2, 0.4])) @ Q.T
        Sw = [np.eye(n), np.diag(rng.uniform(0.5, 3.0, n))]
        Sx = [H @ S @ H.T for S in Sw]
        est, signs, info = sid.sym_filter_select(Sx, Sw)
        err = min(np.abs(est.H - H).max(), np.abs(est.H + H).max())
        assert err <= 1e-8
        assert np.trace(est.H) >= 0

    def test_psd_filter_takes_positive_signs_for_white_input(self):
        rng = np.random.default_rng(13)
        Q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        H = (Q * rng.uniform(0.3, 2.0, 4)) @ Q.T  # PSD
        Sw = [np.eye(4), np.diag(rng.uniform(0.5, 2.0, 4))]
        Sx = [H @ S @ H.T for S in Sw]
        est, signs, info = sid.sym_filter_select(Sx, Sw)
        np.testing.assert_allclose(signs[0], np.ones(4))

    def test_single_process_reports_tie(self):
        H = np.array([[2.0, 1.0], [1.0, 2.0]])
        est, signs, info = sid.sym_filter_select([H @ H], [np.eye(2)])
        assert info["identifiable"] is False
        assert info["all_tie"] is True

    def test_too_large_rejected(self):
        Sx = [np.eye(20)]
        with pytest.raises(TooLarge):
            sid.sym_filter_select(Sx * 2, [np.eye(20)] * 2)


class TestNetworkDeconvolve:
    def test_two_node_single_pole_filter(self):
        S = np.array([[0.0, 0.3], [0.3, 0.0]])
        T = S @ np.linalg.inv(np.eye(2) - S)
        vals = np.sort(np.linalg.eigvalsh(T))
        np.testing.assert_allclose(vals, sorted([0.3 / 0.7, -0.3 / 1.3]),
                                   atol=1e-12)
        Sh, _ = sid.network_deconvolve(T)
        assert scale_aligned_error(Sh, S) <= 1e-8

    def test_identity_filter_passthrough(self):
        G = sim.gen_er_graph(7, 0.4, rng=14, require_connected=True)
        Sh, _ = sid.network_deconvolve(G.data)
        assert scale_aligned_error(Sh, G.data) <= 1e-6

    def test_covariance_input_matches_stationary_path(self):
        G = sim.gen_er_graph(6, 0.5, rng=15, require_connected=True)
        Sigma = sim.diffusion_covariance(G, [1.0, 0.5, 0.2])
        S1, _ = sid.network_deconvolve(Sigma)
        basis, _ = sid.estimate_eigenbasis(Sigma)
        S2, _, _ = sid.infer_shift(basis)
        np.testing.assert_allclose(S1, S2, atol=1e-8)


class TestAutoEps:
    def test_exact_covariance_takes_zero_eps(self):
        G = sim.gen_er_graph(8, 0.4, rng=16, require_connected=True)
        Sigma = sim.diffusion_covariance(G, [1.0, 0.5])
        S, trace, meta = sid.infer_shift_from_signals(Sigma)
        assert meta["eps"] == 0.0
        assert scale_aligned_error(S, G.data) <= 1e-6

    def test_degenerate_covariance_routes_to_partial(self):
        # white covariance: every mode ambiguous, so no spectral
        # constraint remains and the sparsest member comes back
        S, trace, meta = sid.infer_shift_from_signals(np.eye(6))
        assert meta["partial"] and meta["degenerate_modes"] == 6
        assert np.abs(S).sum() == pytest.approx(2.0, abs=1e-6)

    def test_feasibility_gap_feasible_at_margin(self):
        G = sim.gen_er_graph(8, 0.4, rng=17, require_connected=True)
        X = sim.gen_diffusion(G, [1.0, 0.5], 300, rng=18)
        basis, _ = sid.estimate_eigenbasis(X)
        gap = sid.spectral_feasibility_gap(basis)
        S, lam, trace = sid.infer_shift(basis, eps=2.0 * gap)
        assert trace.converged

    def test_grid_search_returns_feasible_eps(self):
        G = sim.gen_er_graph(6, 0.5, rng=19, require_connected=True)
        X = sim.gen_diffusion(G, [1.0, 0.4], 200, rng=20)
        basis, _ = sid.estimate_eigenbasis(X)
        S, lam, trace, eps = sid.infer_shift_grid(basis, eps0=1e-4)
        assert trace.converged
        assert eps > 0
