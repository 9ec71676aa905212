#include "polyfrac/jobs.hpp"

#include "polyfrac/equilibrium.hpp"
#include "polyfrac/moments.hpp"
#include "polyfrac/montecarlo.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace polyfrac {

namespace {

PolyVec require_poly(const JobConfig& cfg,
                     const std::vector<std::pair<std::vector<int>, double>>& terms,
                     const char* key) {
    if (terms.empty())
        throw ConfigError(std::string("query.") + key + ": required for this job kind");
    int degree = 1;
    for (const auto& [e, _] : terms) {
        int d = 0;
        for (int x : e) d += x;
        degree = std::max(degree, d);
    }
    return build_polynomial(terms, cfg.model.state_dim(), degree);
}

void require_grid(const std::vector<double>& g, const char* name) {
    if (g.empty()) throw ConfigError(std::string("grids.") + name + ": must be non-empty");
}

double first_decay_rate(const ModelSpec& model) {
    const GeneratorMatrix G1 = generator_matrix(model, 1);
    double beta = 0.0;
    for (int i = 0; i < G1.spectrum().eigenvalues.size(); ++i)
        beta = std::max(beta, -G1.spectrum().eigenvalues[i].real());
    return beta;
}

JobResult job_moments(const JobConfig& cfg) {
    require_grid(cfg.t_grid, "t");
    require_grid(cfg.alpha_grid, "alpha");
    const PolyVec p = require_poly(cfg, cfg.p_terms, "p");
    JobResult out;
    out.header = {"t", "alpha", "value"};
    for (double t : cfg.t_grid)
        for (double a : cfg.alpha_grid) {
            const double v = (a == 1.0) ? moment_classical(cfg.model, p, cfg.x0, t)
                                        : moment_fractional(cfg.model, p, cfg.x0, t, a);
            out.rows.push_back({format_number(t), format_number(a), format_number(v)});
        }
    return out;
}

JobResult job_correlation(const JobConfig& cfg) {
    require_grid(cfg.t_grid, "t");
    require_grid(cfg.s_grid, "s");
    require_grid(cfg.alpha_grid, "alpha");
    const EquilibriumContext ctx(cfg.model, 1);
    const double beta = first_decay_rate(cfg.model);
    JobResult out;
    out.header = {"s", "t", "alpha", "corr", "lrd_asymptote", "ratio"};
    for (double s : cfg.s_grid)
        for (double t : cfg.t_grid)
            for (double a : cfg.alpha_grid) {
                const double corr = correlation(ctx, s, t, a);
                const double asym = lrd_asymptote(a, beta, s, t);
                out.rows.push_back({format_number(s), format_number(t), format_number(a),
                                    format_number(corr), format_number(asym),
                                    format_number(corr / asym)});
            }
    return out;
}

JobResult job_cross_moments(const JobConfig& cfg) {
    require_grid(cfg.t_grid, "t");
    require_grid(cfg.s_grid, "s");
    require_grid(cfg.alpha_grid, "alpha");
    const PolyVec p = require_poly(cfg, cfg.p_terms, "p");
    const PolyVec q = require_poly(cfg, cfg.q_terms, "q");
    const double alpha = cfg.alpha_grid.front();
    const EquilibriumContext ctx(cfg.model, std::max({1, p.degree(), q.degree()}));
    JobResult out;
    out.header = {"s", "t", "value_fractional", "value_classical"};
    for (double s : cfg.s_grid)
        for (double t : cfg.t_grid) {
            const double frac = cross_moment(ctx, p, q, s, t, alpha);
            const double clas = cross_moment(ctx, p, q, s, t, std::nullopt);
            out.rows.push_back(
                {format_number(s), format_number(t), format_number(frac), format_number(clas)});
        }
    return out;
}

JobResult job_simulate(const JobConfig& cfg) {
    require_grid(cfg.t_grid, "t");
    require_grid(cfg.alpha_grid, "alpha");
    const PolyVec p = require_poly(cfg, cfg.p_terms, "p");
    JobResult out;
    out.header = {"t", "alpha", "estimate", "std_error", "n_paths", "seed"};
    for (double a : cfg.alpha_grid) {
        const auto res = estimate_moments(cfg.model, {p}, cfg.x0, cfg.t_grid, a, cfg.sim);
        for (std::size_t ti = 0; ti < cfg.t_grid.size(); ++ti)
            out.rows.push_back({format_number(cfg.t_grid[ti]), format_number(a),
                                format_number(res[0][ti].estimate),
                                format_number(res[0][ti].std_error),
                                std::to_string(cfg.sim.n_paths), std::to_string(cfg.sim.seed)});
    }
    return out;
}

struct ValidationRow {
    std::string quantity;
    double closed_form;
    EstimateResult mc;
};

JobResult job_validate(const JobConfig& cfg) {
    // Fixed zoo exercised against the Monte-Carlo oracle; the config only
    // scales the simulation effort.
    const double alpha = cfg.alpha_grid.empty() ? 0.5 : cfg.alpha_grid.front();
    const auto b1 = build_basis(1, 1);
    const auto b2 = build_basis(1, 2);
    const PolyVec px = monomial(b1, MultiIndex{{1}});
    const PolyVec px2 = monomial(b2, MultiIndex{{2}});
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
    Eigen::VectorXd xp(1), xc(1), xj(1);
    xp << 0.1;
    xc << 0.4;
    xj << 0.2;

    const ModelSpec bm{BrownianMotionParams{}};
    const ModelSpec ou{PearsonParams{1.0, 0.3, 0.2, 0.0, 0.0}};
    const ModelSpec cir{PearsonParams{1.0, 0.5, 0.0, 0.25, 0.0}};
    const ModelSpec jac{JacobiJumpParams{1.0, 0.5, 0.5, 0.3}};

    std::vector<ValidationRow> rows;
    rows.push_back({"bm_x2_t1", moment_fractional(bm, px2, zero, 1.0, alpha),
                    estimate_moment(bm, px2, zero, 1.0, alpha, cfg.sim)});
    rows.push_back({"ou_x_t1", moment_fractional(ou, px, xp, 1.0, alpha),
                    estimate_moment(ou, px, xp, 1.0, alpha, cfg.sim)});
    rows.push_back({"cir_x2_t1", moment_fractional(cir, px2, xc, 1.0, alpha),
                    estimate_moment(cir, px2, xc, 1.0, alpha, cfg.sim)});
    rows.push_back({"jacobi_x_t1", moment_fractional(jac, px, xj, 1.0, alpha),
                    estimate_moment(jac, px, xj, 1.0, alpha, cfg.sim)});
    rows.push_back({"increment_laplace_s5_t1", fhat_scalar(alpha, 1.0, 5.0, 1.0),
                    estimate_increment_laplace(alpha, 1.0, 5.0, 1.0, cfg.sim)});
    const EquilibriumContext ctx(ou, 1);
    rows.push_back({"ou_cross_xx_s1_t1", cross_moment(ctx, px, px, 1.0, 1.0, alpha),
                    estimate_cross_moment(ou, px, px, 1.0, 1.0, alpha, cfg.sim)});

    JobResult out;
    out.header = {"quantity", "closed_form", "estimate", "std_error", "z_score", "pass"};
    for (const auto& r : rows) {
        const double se = std::max(r.mc.std_error, 1e-300);
        const double z = (r.mc.estimate - r.closed_form) / se;
        const bool pass = std::abs(z) <= 3.0;
        if (!pass) out.exit_code = 3;
        out.rows.push_back({r.quantity, format_number(r.closed_form),
                            format_number(r.mc.estimate), format_number(r.mc.std_error),
                            format_number(z), pass ? "pass" : "fail"});
    }
    return out;
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

JobResult run_job(const JobConfig& cfg) {
    if (cfg.query == "moments") return job_moments(cfg);
    if (cfg.query == "correlation") return job_correlation(cfg);
    if (cfg.query == "cross-moments") return job_cross_moments(cfg);
    if (cfg.query == "simulate") return job_simulate(cfg);
    if (cfg.query == "validate") return job_validate(cfg);
    throw ConfigError("query.kind: unknown job '" + cfg.query + "'");
}

std::string to_csv(const JobResult& result) {
    std::ostringstream out;
    for (std::size_t i = 0; i < result.header.size(); ++i)
        out << result.header[i] << (i + 1 < result.header.size() ? "," : "\n");
    for (const auto& row : result.rows)
        for (std::size_t i = 0; i < row.size(); ++i)
            out << row[i] << (i + 1 < row.size() ? "," : "\n");
    return out.str();
}

std::string to_json(const JobResult& result) {
    // Mirrors the CSV rows exactly: same column names, same rendered values.
    std::ostringstream out;
    out << "[\n";
    for (std::size_t r = 0; r < result.rows.size(); ++r) {
        out << "  {";
        for (std::size_t i = 0; i < result.header.size(); ++i) {
            out << "\"" << result.header[i] << "\": \"" << result.rows[r][i] << "\"";
            if (i + 1 < result.header.size()) out << ", ";
        }
        out << "}" << (r + 1 < result.rows.size() ? "," : "") << "\n";
    }
    out << "]\n";
    return out.str();
}

}  // namespace polyfrac
