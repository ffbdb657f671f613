#include "totreg/solvers.hpp"

#include "totreg/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace totreg {

namespace {

constexpr double kGradGuard = 1e-15;
constexpr double kDivergenceFactor = 1e6;

std::shared_ptr<const Gauge> gauge_or_padded(const TuckerTensor& x) {
    try {
        return std::make_shared<Gauge>(compute_gauge(x));
    } catch (const DegeneratePointError&) {
        return std::make_shared<Gauge>(compute_gauge(x, /*pad_degenerate=*/true));
    }
}

/// Least squares min ||x theta - rhs||_F via Householder QR. Falls back to
/// a ridge-augmented system when the R diagonal signals near-singularity
/// or the system is underdetermined.
Matrix solve_ls(const Matrix& x, const Matrix& rhs, double ridge_eps) {
    if (x.rows() >= x.cols()) {
        Eigen::HouseholderQR<Matrix> qr(x);
        double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
        for (Index j = 0; j < x.cols(); ++j) {
            const double a = std::abs(qr.matrixQR()(j, j));
            dmax = std::max(dmax, a);
            dmin = std::min(dmin, a);
        }
        if (dmax > 0.0 && dmin > ridge_eps * dmax) {
            Matrix theta = qr.solve(rhs);
            if (!theta.allFinite())
                throw NumericalFailureError("least squares produced non-finite solution");
            return theta;
        }
    }
    const double lambda = std::sqrt(ridge_eps);
    Matrix xs(x.rows() + x.cols(), x.cols());
    xs.topRows(x.rows()) = x;
    xs.bottomRows(x.cols()) = lambda * Matrix::Identity(x.cols(), x.cols());
    Matrix rs = Matrix::Zero(xs.rows(), rhs.cols());
    rs.topRows(x.rows()) = rhs;
    Matrix theta = Eigen::HouseholderQR<Matrix>(xs).solve(rs);
    if (!theta.allFinite())
        throw NumericalFailureError("ridge least squares produced non-finite solution");
    return theta;
}

/// Compresses every covariate through the per-mode maps facs[k] (applied as
/// facs[k]^T on mode k), returning an n x prod_k facs[k].cols() matrix whose
/// row i is the vectorized compressed A_i. Streams over row chunks so the
/// scaled covariate stack is never materialized.
Matrix compress_covariates(const LinearDesign& design,
                           const std::vector<const Matrix*>& facs) {
    const Index n = design.n();
    Index out_cols = 1;
    for (const Matrix* f : facs) out_cols *= f->cols();
    Matrix rows(n, out_cols);
    const Index chunk = std::max<Index>(
        1, (Index{1} << 22) / std::max<Index>(1, design.a.cols()));
    for (Index i0 = 0; i0 < n; i0 += chunk) {
        const Index b = std::min(chunk, n - i0);
        std::vector<Index> shape{b};
        shape.insert(shape.end(), design.covariate_shape.begin(),
                     design.covariate_shape.end());
        Matrix blk = design.scale * design.a.middleRows(i0, b);
        DenseTensor tk(shape, Eigen::Map<const Vector>(blk.data(), blk.size()));
        blk.resize(0, 0);
        for (size_t j = 0; j < facs.size(); ++j)
            tk = mode_product(tk, facs[j]->transpose(),
                              static_cast<Index>(j) + 1);
        rows.middleRows(i0, b) = matricize(tk, 0);
    }
    return rows;
}

std::vector<Index> pick_rank(const SolverConfig& cfg, const TuckerTensor& x) {
    return cfg.input_rank.empty() ? x.ranks() : cfg.input_rank;
}

} // namespace

double loss(const ProblemInstance& instance, const DenseTensor& x) {
    DenseTensor r = apply(instance.design, x);
    r -= instance.observations;
    return 0.5 * r.data().squaredNorm();
}

DenseTensor riemannian_gradient(const ProblemInstance& instance, const Gauge& g) {
    DenseTensor r = apply(instance.design, g.base.dense());
    r -= instance.observations;
    return project_tangent(g, adjoint(instance.design, r));
}

DenseTensor riemannian_gradient(const ProblemInstance& instance,
                                const TuckerTensor& x) {
    return riemannian_gradient(instance, *gauge_or_padded(x));
}

std::pair<TuckerTensor, double> rgd_step(const ProblemInstance& instance,
                                         const TuckerTensor& x,
                                         const SolverConfig& cfg) {
    auto g = gauge_or_padded(x);
    DenseTensor grad = riemannian_gradient(instance, *g);
    const double gn = frob_norm(grad);
    if (gn <= kGradGuard * frob_norm(instance.observations))
        return {x, 0.0};
    const double agn2 = apply(instance.design, grad).data().squaredNorm();
    if (agn2 <= 0.0)
        throw NumericalFailureError("rgd_step: operator annihilates the gradient");
    const double alpha = gn * gn / agn2;
    DenseTensor next = x.dense();
    grad *= alpha;
    next -= grad;
    return {retract(next, pick_rank(cfg, x), cfg.retraction), alpha};
}

TuckerTensor rgn_step(const ProblemInstance& instance, const TuckerTensor& x,
                      const SolverConfig& cfg) {
    const LinearDesign& design = instance.design;
    const Index d = design.d;
    const Index mm = design.m;
    const Index n = design.n();

    auto gauge = gauge_or_padded(x);
    const TuckerTensor& base = gauge->base;
    const std::vector<Matrix>& U = base.factors;
    const DenseTensor& S = base.core;
    const std::vector<Index> ranks = S.shape();

    // Covariates compressed through the factors, all i at once.
    std::vector<const Matrix*> facs(static_cast<size_t>(d));
    for (Index k = 0; k < d; ++k) facs[static_cast<size_t>(k)] = &U[static_cast<size_t>(k)];
    Matrix atil = compress_covariates(design, facs); // n x prod_{k<=d} r_k

    // Per covariate mode: compression with U_{k_perp} on mode k. Modes whose
    // factor is already square have no off-subspace block and are skipped.
    std::vector<Matrix> perp_rows(static_cast<size_t>(d));
    std::vector<std::vector<Index>> perp_shape(static_cast<size_t>(d));
    for (Index k = 0; k < d; ++k) {
        const Matrix& uperp = gauge->u_perp[static_cast<size_t>(k)];
        if (uperp.cols() == 0) continue;
        std::vector<const Matrix*> fk = facs;
        fk[static_cast<size_t>(k)] = &uperp;
        perp_rows[static_cast<size_t>(k)] = compress_covariates(design, fk);
        std::vector<Index>& ps = perp_shape[static_cast<size_t>(k)];
        for (Index j = 0; j < d; ++j)
            ps.push_back(fk[static_cast<size_t>(j)]->cols());
    }

    // Observations compressed through the response-mode factors.
    DenseTensor yc = instance.observations;
    for (Index l = 0; l < mm; ++l)
        yc = mode_product(yc, U[static_cast<size_t>(d + l)].transpose(), l + 1);
    Matrix ymat = matricize(yc, 0); // n x prod_{l>d} r_l

    const Index rd_prod = atil.cols();
    const Index rm_prod = ymat.cols();

    // Core slices over the response multi-index, shared across rows.
    Eigen::Map<const Matrix> smat(S.data().data(), rd_prod, rm_prod);
    std::vector<Index> lead_shape(ranks.begin(), ranks.begin() + d);
    std::vector<std::vector<Matrix>> slice_mk_t(static_cast<size_t>(d));
    for (Index k = 0; k < d; ++k) {
        auto& per_j = slice_mk_t[static_cast<size_t>(k)];
        per_j.resize(static_cast<size_t>(rm_prod));
        for (Index j = 0; j < rm_prod; ++j) {
            DenseTensor sj(lead_shape, smat.col(j));
            per_j[static_cast<size_t>(j)] = matricize(sj, k).transpose();
        }
    }

    // Joint system for the core block and the covariate-mode blocks.
    Index ncols = S.size();
    std::vector<Index> dk_cols(static_cast<size_t>(d));
    std::vector<Index> dk_off(static_cast<size_t>(d));
    for (Index k = 0; k < d; ++k) {
        dk_off[static_cast<size_t>(k)] = ncols;
        const Index pk = U[static_cast<size_t>(k)].rows();
        dk_cols[static_cast<size_t>(k)] = (pk - ranks[static_cast<size_t>(k)]) *
                                          ranks[static_cast<size_t>(k)];
        ncols += dk_cols[static_cast<size_t>(k)];
    }
    Matrix xmat = Matrix::Zero(n * rm_prod, ncols);
    Vector rhs(n * rm_prod);
    for (Index i = 0; i < n; ++i) {
        std::vector<Matrix> gik(static_cast<size_t>(d));
        for (Index k = 0; k < d; ++k) {
            if (dk_cols[static_cast<size_t>(k)] == 0) continue;
            DenseTensor small(perp_shape[static_cast<size_t>(k)],
                              perp_rows[static_cast<size_t>(k)].row(i).transpose());
            gik[static_cast<size_t>(k)] = matricize(small, k);
        }
        for (Index j = 0; j < rm_prod; ++j) {
            const Index row = i * rm_prod + j;
            rhs(row) = ymat(i, j);
            xmat.block(row, j * rd_prod, 1, rd_prod) = atil.row(i);
            for (Index k = 0; k < d; ++k) {
                if (dk_cols[static_cast<size_t>(k)] == 0) continue;
                Matrix c = gik[static_cast<size_t>(k)] *
                           slice_mk_t[static_cast<size_t>(k)][static_cast<size_t>(j)];
                xmat.block(row, dk_off[static_cast<size_t>(k)], 1, c.size()) =
                    Eigen::Map<const Vector>(c.data(), c.size()).transpose();
            }
        }
    }
    Vector theta = solve_ls(xmat, rhs, cfg.ridge_eps);

    TangentVector tv;
    tv.gauge = gauge;
    tv.b = DenseTensor(ranks, theta.head(S.size()));
    tv.d.resize(static_cast<size_t>(d + mm));
    for (Index k = 0; k < d; ++k) {
        const Index pk = U[static_cast<size_t>(k)].rows();
        const Index rk = ranks[static_cast<size_t>(k)];
        tv.d[static_cast<size_t>(k)] = Eigen::Map<const Matrix>(
            theta.data() + dk_off[static_cast<size_t>(k)], pk - rk, rk);
    }

    // Independent multi-RHS system per response mode.
    for (Index k = d; k < d + mm; ++k) {
        const Index rk = ranks[static_cast<size_t>(k)];
        const Index pk = U[static_cast<size_t>(k)].rows();
        const Index other = rm_prod / rk;
        if (pk == rk) {
            tv.d[static_cast<size_t>(k)] = Matrix(0, rk);
            continue;
        }
        std::vector<Index> resp_shape(ranks.begin() + d, ranks.end());

        // Response compression leaving mode k ambient.
        DenseTensor ycd = instance.observations;
        std::vector<Index> mixed_shape;
        for (Index l = 0; l < mm; ++l) {
            if (l == k - d) {
                mixed_shape.push_back(pk);
                continue;
            }
            ycd = mode_product(ycd, U[static_cast<size_t>(d + l)].transpose(), l + 1);
            mixed_shape.push_back(ranks[static_cast<size_t>(d + l)]);
        }
        Matrix ycd_rows = matricize(ycd, 0);

        Matrix ak(n * other, rk);
        Matrix yk(n * other, pk - rk);
        const Matrix& uperp = gauge->u_perp[static_cast<size_t>(k)];
        for (Index i = 0; i < n; ++i) {
            Vector v = smat.transpose() * atil.row(i).transpose(); // <A_i~, S>_*
            DenseTensor vt(resp_shape, std::move(v));
            ak.middleRows(i * other, other) = matricize(vt, k - d).transpose();

            DenseTensor yi(mixed_shape, ycd_rows.row(i).transpose());
            yk.middleRows(i * other, other) =
                matricize(yi, k - d).transpose() * uperp;
        }
        Matrix dkt = solve_ls(ak, yk, cfg.ridge_eps); // r_k x (p_k - r_k)
        tv.d[static_cast<size_t>(k)] = dkt.transpose();
    }

    return retract(tangent_to_dense(tv), pick_rank(cfg, x), cfg.retraction);
}

TuckerTensor rgn_step_vector_closed_form(const ProblemInstance& instance,
                                         const TuckerTensor& x,
                                         const SolverConfig& cfg) {
    const LinearDesign& design = instance.design;
    if (design.kind != DesignKind::Vector)
        throw std::invalid_argument("closed-form step requires a vector design");
    const Index n = design.n();
    const Index p1 = design.covariate_shape[0];
    if (n < p1)
        throw DegenerateDesignError("closed-form step requires n >= p_1");

    const Matrix abar = design.scale * design.a; // n x p1
    Matrix g = abar.transpose() * abar;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
    const Vector& ev = eig.eigenvalues();
    if (ev(0) <= 1e-12 * ev(ev.size() - 1))
        throw DegenerateDesignError("closed-form step requires invertible A^T A");
    Eigen::LLT<Matrix> gchol(g);

    auto gauge = gauge_or_padded(x);
    const TuckerTensor& base = gauge->base;
    const std::vector<Matrix>& U = base.factors;
    const std::vector<Index> ranks = base.core.shape();
    const std::vector<Index> ambient = base.ambient_shape();
    const Index order = base.order(); // 1 + m

    const Matrix& u1 = U[0];
    const Matrix& u1perp = gauge->u_perp[0];
    const Matrix& w1 = gauge->w[0];
    const Matrix& v1 = gauge->v[0];
    Matrix h = u1.transpose() * g * u1; // r_1 x r_1

    Matrix m1y = matricize(instance.observations, 0); // n x prod_{j>=2} p_j

    // Observations compressed on every response mode.
    DenseTensor yc = instance.observations;
    for (Index l = 1; l < order; ++l)
        yc = mode_product(yc, U[static_cast<size_t>(l)].transpose(), l);
    Matrix m1yc = matricize(yc, 0); // n x prod_{j>=2} r_j

    // Shared piece: U_{1_perp} U_{1_perp}^T (A^T A)^{-1} A^T M_1(Y) W_1.
    Matrix z = gchol.solve(abar.transpose() * m1y); // p1 x prod p_j
    Matrix zw = u1perp * (u1perp.transpose() * (z * w1)); // p1 x r1

    // Core block.
    Matrix inner = m1yc - abar * zw * v1.transpose(); // n x prod r_j
    Matrix m1b = h.llt().solve(u1.transpose() * (abar.transpose() * inner));
    DenseTensor b = tensorize(m1b, 0, ranks);
    TuckerTensor bt;
    bt.core = std::move(b);
    bt.factors = U;
    DenseTensor out = bt.dense();

    // Mode-1 off-subspace block.
    if (u1perp.cols() > 0)
        out += tensorize(Matrix(zw * w1.transpose()), 0, ambient);

    // Response-mode off-subspace blocks.
    DenseTensor ya = mode_product(instance.observations, abar.transpose(), 0);
    for (Index k = 1; k < order; ++k) {
        const Matrix& uperp = gauge->u_perp[static_cast<size_t>(k)];
        if (uperp.cols() == 0) continue;
        const Matrix& wk = gauge->w[static_cast<size_t>(k)];
        const Matrix& vk = gauge->v[static_cast<size_t>(k)];

        // K = V_k^T (I x ... x (U_1^T A^T A U_1) x ...) V_k, applied per column.
        std::vector<Index> rest_shape;
        for (Index j = 0; j < order; ++j)
            if (j != k) rest_shape.push_back(ranks[static_cast<size_t>(j)]);
        Matrix hv(vk.rows(), vk.cols());
        for (Index c = 0; c < vk.cols(); ++c) {
            DenseTensor col(rest_shape, vk.col(c));
            hv.col(c) = mode_product(col, h, 0).data();
        }
        Matrix kmat = vk.transpose() * hv;
        Eigen::FullPivLU<Matrix> lu(kmat);
        if (!lu.isInvertible())
            throw NumericalFailureError("closed-form step: singular middle matrix");

        Matrix mk = matricize(ya, k); // p_k x prod_{j != k} p_j
        Matrix left = uperp * (uperp.transpose() * (mk * wk)); // p_k x r_k
        Matrix term = left * lu.solve(wk.transpose()); // K^{-1} W_k^T on the right
        out += tensorize(term, k, ambient);
    }

    return retract(out, pick_rank(cfg, x), cfg.retraction);
}

TuckerTensor pgd_step(const ProblemInstance& instance, const TuckerTensor& x,
                      double stepsize, const SolverConfig& cfg) {
    DenseTensor xd = x.dense();
    DenseTensor r = apply(instance.design, xd);
    r -= instance.observations;
    DenseTensor grad = adjoint(instance.design, r);
    grad *= stepsize;
    xd -= grad;
    return retract(xd, pick_rank(cfg, x), cfg.retraction);
}

DenseTensor FactoredState::dense() const {
    DenseTensor out = core;
    for (size_t k = 0; k < factors.size(); ++k)
        out = mode_product(out, factors[k], static_cast<Index>(k));
    return out;
}

FactoredState factored_gd_step(const ProblemInstance& instance,
                               const FactoredState& s, double stepsize) {
    DenseTensor r = apply(instance.design, s.dense());
    r -= instance.observations;
    DenseTensor g = adjoint(instance.design, r);

    FactoredState next = s;
    DenseTensor gc = g;
    for (size_t k = 0; k < s.factors.size(); ++k)
        gc = mode_product(gc, s.factors[k].transpose(), static_cast<Index>(k));
    gc *= stepsize;
    next.core -= gc;

    for (size_t k = 0; k < s.factors.size(); ++k) {
        DenseTensor other = s.core;
        for (size_t j = 0; j < s.factors.size(); ++j)
            if (j != k) other = mode_product(other, s.factors[j], static_cast<Index>(j));
        Matrix gf = matricize(g, static_cast<Index>(k)) *
                    matricize(other, static_cast<Index>(k)).transpose();
        next.factors[k] -= stepsize * gf;
    }
    return next;
}

namespace {

struct TraceContext {
    const ProblemInstance* instance;
    const SolverConfig* cfg;
    DenseTensor truth_dense;
    double truth_norm = 0.0;
    bool has_truth = false;
    std::chrono::steady_clock::time_point start;

    explicit TraceContext(const ProblemInstance& inst, const SolverConfig& c)
        : instance(&inst), cfg(&c), start(std::chrono::steady_clock::now()) {
        if (inst.ground_truth) {
            truth_dense = inst.ground_truth->dense();
            truth_norm = frob_norm(truth_dense);
            has_truth = truth_norm > 0;
        }
    }

    IterRecord record(int iter, const DenseTensor& xd, double stepsize) const {
        IterRecord rec;
        rec.iter = iter;
        rec.loss = loss(*instance, xd);
        rec.stepsize = stepsize;
        if (has_truth) {
            DenseTensor diff = xd;
            diff -= truth_dense;
            rec.rel_rmse = frob_norm(diff) / truth_norm;
        }
        rec.elapsed_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
        return rec;
    }
};

/// RGD/RGN iteration loop.
std::pair<TuckerTensor, RunTrace> solve_manifold(const ProblemInstance& instance,
                                                 const SolverConfig& cfg,
                                                 const TuckerTensor& x0) {
    TraceContext ctx(instance, cfg);
    TuckerTensor x = x0;
    RunTrace trace;
    IterRecord rec0 = ctx.record(0, x.dense(), 0.0);
    if (!std::isfinite(rec0.loss)) {
        trace.reason = Termination::NumericalFailure;
        return {x, trace};
    }
    trace.records.push_back(rec0);
    double prev_loss = rec0.loss;

    const bool use_vector_fast_path =
        cfg.algorithm == Algorithm::Rgn &&
        instance.design.kind == DesignKind::Vector &&
        instance.design.n() >= instance.design.covariate_shape[0];

    trace.reason = Termination::MaxIters;
    for (int t = 1; t <= cfg.max_iters; ++t) {
        double stepsize = 0.0;
        bool stationary = false;
        try {
            if (cfg.algorithm == Algorithm::Rgd) {
                auto [next, alpha] = rgd_step(instance, x, cfg);
                stepsize = alpha;
                stationary = (alpha == 0.0);
                x = std::move(next);
            } else if (use_vector_fast_path) {
                try {
                    x = rgn_step_vector_closed_form(instance, x, cfg);
                } catch (const DegenerateDesignError&) {
                    x = rgn_step(instance, x, cfg);
                }
            } else {
                x = rgn_step(instance, x, cfg);
            }
        } catch (const DegeneratePointError&) {
            trace.reason = Termination::Degenerate;
            return {x, trace};
        } catch (const DegenerateDesignError&) {
            trace.reason = Termination::Degenerate;
            return {x, trace};
        } catch (const NumericalFailureError&) {
            trace.reason = Termination::NumericalFailure;
            return {x, trace};
        }

        IterRecord rec = ctx.record(t, x.dense(), stepsize);
        if (!std::isfinite(rec.loss)) {
            trace.reason = Termination::NumericalFailure;
            return {x, trace};
        }
        trace.records.push_back(rec);
        if (stationary) {
            trace.reason = Termination::TolReached;
            return {x, trace};
        }
        if (ctx.has_truth) {
            if (rec.rel_rmse <= cfg.tol_rel_rmse) {
                trace.reason = Termination::TolReached;
                return {x, trace};
            }
        } else if (std::abs(prev_loss - rec.loss) <=
                   cfg.tol_rel_rmse * std::max(prev_loss, 1e-300)) {
            trace.reason = Termination::TolReached;
            return {x, trace};
        }
        prev_loss = rec.loss;
    }
    return {x, trace};
}

/// One baseline run at a fixed stepsize; shared by PGD and factored GD.
template <typename State, typename StepFn, typename DenseFn>
std::pair<State, RunTrace> run_baseline(const ProblemInstance& instance,
                                        const SolverConfig& cfg, State state,
                                        double stepsize, StepFn step,
                                        DenseFn to_dense) {
    TraceContext ctx(instance, cfg);
    RunTrace trace;
    IterRecord rec0 = ctx.record(0, to_dense(state), 0.0);
    trace.records.push_back(rec0);
    const double loss0 = rec0.loss;
    double prev_loss = loss0;

    trace.reason = Termination::MaxIters;
    for (int t = 1; t <= cfg.max_iters; ++t) {
        try {
            state = step(state, stepsize);
        } catch (const NumericalFailureError&) {
            trace.reason = Termination::NumericalFailure;
            return {state, trace};
        }
        IterRecord rec = ctx.record(t, to_dense(state), stepsize);
        if (!std::isfinite(rec.loss) || rec.loss > kDivergenceFactor * std::max(loss0, 1.0)) {
            trace.diverged = true;
            trace.reason = Termination::NumericalFailure;
            return {state, trace};
        }
        trace.records.push_back(rec);
        if (ctx.has_truth) {
            if (rec.rel_rmse <= cfg.tol_rel_rmse) {
                trace.reason = Termination::TolReached;
                return {state, trace};
            }
        } else if (std::abs(prev_loss - rec.loss) <=
                   cfg.tol_rel_rmse * std::max(prev_loss, 1e-300)) {
            trace.reason = Termination::TolReached;
            return {state, trace};
        }
        prev_loss = rec.loss;
    }
    return {state, trace};
}

double final_error(const RunTrace& trace, bool has_truth) {
    if (trace.diverged || trace.records.empty())
        return std::numeric_limits<double>::infinity();
    const IterRecord& last = trace.records.back();
    return has_truth ? last.rel_rmse : last.loss;
}

} // namespace

std::pair<TuckerTensor, RunTrace> solve(const ProblemInstance& instance,
                                        const SolverConfig& cfg,
                                        const TuckerTensor& x0) {
    if (cfg.max_iters < 1)
        throw std::invalid_argument("solve: max_iters must be >= 1");
    if (cfg.algorithm == Algorithm::Rgd || cfg.algorithm == Algorithm::Rgn)
        return solve_manifold(instance, cfg, x0);

    // Baselines: run the stepsize grid, keep the best final error.
    const bool has_truth = instance.ground_truth.has_value();
    std::pair<TuckerTensor, RunTrace> best;
    double best_err = std::numeric_limits<double>::infinity();
    bool have_any = false;

    for (double s : cfg.baseline_stepsizes) {
        if (cfg.algorithm == Algorithm::Pgd) {
            auto [state, trace] = run_baseline(
                instance, cfg, x0, s,
                [&](const TuckerTensor& xt, double step) {
                    return pgd_step(instance, xt, step, cfg);
                },
                [](const TuckerTensor& xt) { return xt.dense(); });
            const double err = final_error(trace, has_truth);
            if (!have_any || err < best_err) {
                best = {std::move(state), std::move(trace)};
                best_err = err;
                have_any = true;
            }
        } else {
            FactoredState st{x0.core, x0.factors};
            auto [state, trace] = run_baseline(
                instance, cfg, st, s,
                [&](const FactoredState& fs, double step) {
                    return factored_gd_step(instance, fs, step);
                },
                [](const FactoredState& fs) { return fs.dense(); });
            const double err = final_error(trace, has_truth);
            if (!have_any || err < best_err) {
                // Report the factored state retracted to the manifold.
                TuckerTensor xt = thosvd(state.dense(), cfg.input_rank.empty()
                                                            ? x0.ranks()
                                                            : cfg.input_rank);
                best = {std::move(xt), std::move(trace)};
                best_err = err;
                have_any = true;
            }
        }
    }
    if (!have_any)
        throw std::invalid_argument("solve: baseline stepsize grid is empty");
    return best;
}

} // namespace totreg
