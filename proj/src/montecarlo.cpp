#include "polyfrac/montecarlo.hpp"

#include "polyfrac/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

namespace polyfrac {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Kanter/Zolotarev draw: X = (A(U)/E)^{(1-alpha)/alpha} with U ~ U(0,pi),
// E ~ Exp(1) has Laplace transform exp(-lambda^alpha).
double stable_positive_draw(double alpha, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng) * kPi;
    while (u <= 0.0 || u >= kPi) u = unif(rng) * kPi;
    const double e = -std::log1p(-unif(rng));
    const double log_a =
        (alpha * std::log(std::sin(alpha * u)) + (1.0 - alpha) * std::log(std::sin((1.0 - alpha) * u)) -
         std::log(std::sin(u))) /
        (1.0 - alpha);
    return std::exp((1.0 - alpha) / alpha * (log_a - std::log(e)));
}

// Streams the stable path and answers first-passage queries for
// non-decreasing calendar levels without storing the path.
class LStream {
  public:
    LStream(double alpha, double ds, std::mt19937_64& rng)
        : ds_(ds), scale_(std::pow(ds, 1.0 / alpha)), alpha_(alpha), rng_(rng) {
        sigma_cur_ = scale_ * stable_positive_draw(alpha_, rng_);
    }

    double at(double t) {
        while (sigma_cur_ <= t) {
            sigma_prev_ = sigma_cur_;
            sigma_cur_ += scale_ * stable_positive_draw(alpha_, rng_);
            ++k_;
            if (k_ > 400000000L)
                throw NumericalError("inverse subordinator path exceeded the step budget");
        }
        return k_ * ds_ + ds_ * (t - sigma_prev_) / (sigma_cur_ - sigma_prev_);
    }

  private:
    double ds_;
    double scale_;
    double alpha_;
    std::mt19937_64& rng_;
    double sigma_prev_ = 0.0;
    double sigma_cur_ = 0.0;
    long k_ = 0;
};

class ModelStepper {
  public:
    ModelStepper(const ModelSpec& model, const Eigen::VectorXd& x0, std::mt19937_64& rng)
        : model_(model), x_(x0), rng_(rng) {
        if (x0.size() != model.state_dim())
            throw std::invalid_argument("simulate_model: initial state dimension mismatch");
        if (model.kind() == ModelSpec::Kind::LevyOU) {
            const auto& p = model.as<LevyOUParams>();
            const double implied = 2.0 * p.jump_rate * p.jump_mean * p.jump_mean;
            if (p.levy_m2 > 0.0 && p.jump_rate <= 0.0)
                throw std::invalid_argument(
                    "simulate_model: LevyOU needs an explicit jump law (jump_rate, jump_mean)");
            if (std::abs(implied - p.levy_m2) > 1e-8 * std::max(1.0, p.levy_m2))
                throw std::invalid_argument(
                    "simulate_model: LevyOU jump law moments disagree with levy_m2");
        }
        if (model.kind() == ModelSpec::Kind::QTSM) {
            const auto& p = model.as<QTSMParams>();
            x_[1] = p.R0 + p.R1 * x_[0] + p.R2 * x_[0] * x_[0];
        }
    }

    void advance_to(double target, double dt) {
        while (s_ + dt <= target) step(dt);
        const double rem = target - s_;
        if (rem > 1e-14 * std::max(1.0, target)) step(rem);
    }

    const Eigen::VectorXd& state() const { return x_; }
    double clamp_rate() const { return steps_ == 0 ? 0.0 : static_cast<double>(guarded_) / steps_; }

    void step(double h) {
        ++steps_;
        const double sqh = std::sqrt(h);
        switch (model_.kind()) {
            case ModelSpec::Kind::BrownianMotion:
                x_[0] += sqh * normal_(rng_);
                break;
            case ModelSpec::Kind::Pearson: {
                const auto& p = model_.as<PearsonParams>();
                double arg = p.a0 + p.a1 * x_[0] + p.a2 * x_[0] * x_[0];
                if (arg < 0.0) {
                    arg = 0.0;
                    ++guarded_;
                }
                x_[0] += -p.beta * (x_[0] - p.theta) * h + std::sqrt(arg) * sqh * normal_(rng_);
                break;
            }
            case ModelSpec::Kind::JacobiJump: {
                const auto& p = model_.as<JacobiJumpParams>();
                double arg = x_[0] * (1.0 - x_[0]);
                if (arg < 0.0) {
                    arg = 0.0;
                    ++guarded_;
                }
                x_[0] += -p.beta * (x_[0] - p.theta) * h + p.sigma * std::sqrt(arg) * sqh * normal_(rng_);
                if (p.lambda > 0.0) {
                    std::poisson_distribution<int> pois(p.lambda * h);
                    if (pois(rng_) % 2 == 1) x_[0] = 1.0 - x_[0];
                }
                if (x_[0] < 0.0) {
                    x_[0] = 0.0;
                    ++guarded_;
                } else if (x_[0] > 1.0) {
                    x_[0] = 1.0;
                    ++guarded_;
                }
                break;
            }
            case ModelSpec::Kind::LevyOU: {
                const auto& p = model_.as<LevyOUParams>();
                double dy = p.levy_b * h + p.levy_a * sqh * normal_(rng_);
                if (p.jump_rate > 0.0) {
                    std::poisson_distribution<int> pois(p.jump_rate * h);
                    const int n = pois(rng_);
                    std::exponential_distribution<double> jump(1.0 / p.jump_mean);
                    for (int i = 0; i < n; ++i) dy += jump(rng_);
                    dy -= p.jump_rate * p.jump_mean * h;  // compensator
                }
                x_[0] += -p.beta * (x_[0] - p.theta) * h + p.sigma * dy;
                break;
            }
            case ModelSpec::Kind::QTSM: {
                const auto& p = model_.as<QTSMParams>();
                x_[0] += (p.b - p.beta * x_[0]) * h + p.sigma * sqh * normal_(rng_);
                x_[1] = p.R0 + p.R1 * x_[0] + p.R2 * x_[0] * x_[0];
                break;
            }
        }
        s_ += h;
    }

  private:
    const ModelSpec& model_;
    Eigen::VectorXd x_;
    std::mt19937_64& rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    double s_ = 0.0;
    long steps_ = 0;
    long guarded_ = 0;
};

void run_paths(long n_paths, int jobs, const std::function<void(long)>& body) {
    if (jobs <= 1) {
        for (long i = 0; i < n_paths; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    const long chunk = (n_paths + jobs - 1) / jobs;
    for (int w = 0; w < jobs; ++w) {
        const long lo = w * chunk;
        const long hi = std::min(n_paths, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (long i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

EstimateResult reduce(const std::vector<double>& samples) {
    const std::size_t n = samples.size();
    const double mean = pairwise_sum(samples.data(), n) / static_cast<double>(n);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (samples[i] - mean) * (samples[i] - mean);
    const double var = pairwise_sum(sq.data(), n) / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

double slowest_rate(const ModelSpec& model) {
    const GeneratorMatrix G = generator_matrix(model, 2);
    double rate = std::numeric_limits<double>::infinity();
    const auto& ev = G.spectrum().eigenvalues;
    const double tol = 1e-9 * std::max(G.matrix().cwiseAbs().maxCoeff(), 1.0);
    for (int i = 0; i < ev.size(); ++i) {
        const double re = std::abs(ev[i].real());
        if (re > tol) rate = std::min(rate, re);
    }
    if (!std::isfinite(rate))
        throw std::invalid_argument("stationary_sample: model has no mean reversion");
    return rate;
}

}  // namespace

void validate(const SimConfig& cfg) {
    if (cfg.n_paths < 100) throw std::invalid_argument("SimConfig: n_paths must be >= 100");
    if (!(cfg.dt_operational > 0.0) || !(cfg.dt_subordinator > 0.0))
        throw std::invalid_argument("SimConfig: time steps must be > 0");
    if (!(cfg.horizon > 0.0)) throw std::invalid_argument("SimConfig: horizon must be > 0");
    if (cfg.jobs < 1) throw std::invalid_argument("SimConfig: jobs must be >= 1");
}

std::uint64_t path_seed(std::uint64_t master, long path_index) {
    return splitmix64(master ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(path_index + 1)));
}

std::vector<double> simulate_stable_increments(double alpha, long n, double ds,
                                               std::mt19937_64& rng) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("simulate_stable_increments: alpha must lie in (0,1)");
    if (n < 0 || !(ds > 0.0)) throw std::invalid_argument("simulate_stable_increments: bad shape");
    std::vector<double> inc(static_cast<std::size_t>(n));
    const double scale = std::pow(ds, 1.0 / alpha);
    for (auto& v : inc) v = scale * stable_positive_draw(alpha, rng);
    return inc;
}

std::vector<double> invert_path(const std::vector<double>& sigma_cum,
                                const std::vector<double>& t_grid, double ds, bool* truncated) {
    if (truncated) *truncated = false;
    std::vector<double> L(t_grid.size());
    std::size_t j = 0;
    double prev_t = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const double t = t_grid[i];
        if (t < prev_t) throw std::invalid_argument("invert_path: calendar grid must be sorted");
        prev_t = t;
        while (j < sigma_cum.size() && sigma_cum[j] <= t) ++j;
        if (j >= sigma_cum.size()) {
            if (truncated) *truncated = true;
            L[i] = sigma_cum.size() * ds;
            continue;
        }
        const double lo = (j == 0) ? 0.0 : sigma_cum[j - 1];
        L[i] = j * ds + ds * (t - lo) / (sigma_cum[j] - lo);
    }
    return L;
}

Eigen::VectorXd stationary_sample(const ModelSpec& model, double dt, std::mt19937_64& rng) {
    Eigen::VectorXd x(model.state_dim());
    switch (model.kind()) {
        case ModelSpec::Kind::Pearson: {
            const auto& p = model.as<PearsonParams>();
            if (!(p.beta > 0.0))
                throw std::invalid_argument("stationary_sample: Pearson needs beta > 0");
            if (p.a1 == 0.0 && p.a2 == 0.0) {
                std::normal_distribution<double> law(p.theta, std::sqrt(p.a0 / (2.0 * p.beta)));
                x[0] = law(rng);
                return x;
            }
            if (p.a0 == 0.0 && p.a2 == 0.0 && p.a1 > 0.0) {
                std::gamma_distribution<double> law(2.0 * p.beta * p.theta / p.a1,
                                                    p.a1 / (2.0 * p.beta));
                x[0] = law(rng);
                return x;
            }
            break;
        }
        case ModelSpec::Kind::JacobiJump: {
            const auto& p = model.as<JacobiJumpParams>();
            if (p.lambda == 0.0) {
                const double s2 = p.sigma * p.sigma;
                std::gamma_distribution<double> ga(2.0 * p.beta * p.theta / s2, 1.0);
                std::gamma_distribution<double> gb(2.0 * p.beta * (1.0 - p.theta) / s2, 1.0);
                const double a = ga(rng), b = gb(rng);
                x[0] = a / (a + b);
                return x;
            }
            break;
        }
        case ModelSpec::Kind::BrownianMotion:
            throw std::invalid_argument("stationary_sample: Brownian motion has no stationary law");
        default:
            break;
    }
    // Burn-in fallback from a central starting point.
    Eigen::VectorXd x0(model.state_dim());
    switch (model.kind()) {
        case ModelSpec::Kind::Pearson: x0[0] = model.as<PearsonParams>().theta; break;
        case ModelSpec::Kind::JacobiJump: x0[0] = model.as<JacobiJumpParams>().theta; break;
        case ModelSpec::Kind::LevyOU: x0[0] = model.as<LevyOUParams>().theta; break;
        case ModelSpec::Kind::QTSM: {
            const auto& p = model.as<QTSMParams>();
            x0[0] = p.b / p.beta;
            x0[1] = 0.0;  // recomputed by the stepper
            break;
        }
        default: x0.setZero(); break;
    }
    ModelStepper st(model, x0, rng);
    st.advance_to(20.0 / slowest_rate(model), dt);
    return st.state();
}

std::vector<Eigen::VectorXd> simulate_model(const ModelSpec& model, const Eigen::VectorXd& x0,
                                            double operational_horizon, double dt,
                                            std::mt19937_64& rng, double* clamp_rate) {
    if (!(dt > 0.0) || !(operational_horizon >= 0.0))
        throw std::invalid_argument("simulate_model: bad time parameters");
    ModelStepper st(model, x0, rng);
    const long n = static_cast<long>(std::ceil(operational_horizon / dt));
    std::vector<Eigen::VectorXd> path;
    path.reserve(static_cast<std::size_t>(n + 1));
    path.push_back(st.state());
    for (long i = 0; i < n; ++i) {
        st.step(dt);
        path.push_back(st.state());
    }
    if (clamp_rate) *clamp_rate = st.clamp_rate();
    return path;
}

std::vector<std::vector<EstimateResult>> estimate_moments(const ModelSpec& model,
                                                          const std::vector<PolyVec>& ps,
                                                          const Eigen::VectorXd& x0,
                                                          const std::vector<double>& ts,
                                                          double alpha, const SimConfig& cfg) {
    validate(cfg);
    if (ps.empty() || ts.empty()) throw std::invalid_argument("estimate_moments: empty grid");
    std::vector<double> sorted_ts = ts;
    std::sort(sorted_ts.begin(), sorted_ts.end());
    if (sorted_ts.back() > cfg.horizon)
        throw std::invalid_argument("estimate_moments: calendar time beyond the horizon");

    const std::size_t np = ps.size(), nt = ts.size(), n = static_cast<std::size_t>(cfg.n_paths);
    std::vector<std::vector<std::vector<double>>> samples(
        np, std::vector<std::vector<double>>(nt, std::vector<double>(n)));

    run_paths(cfg.n_paths, cfg.jobs, [&](long i) {
        std::mt19937_64 rng(path_seed(cfg.seed, i));
        LStream ls(alpha, cfg.dt_subordinator, rng);
        std::vector<double> L(nt);
        for (std::size_t k = 0; k < nt; ++k) L[k] = ls.at(sorted_ts[k]);
        ModelStepper st(model, x0, rng);
        for (std::size_t k = 0; k < nt; ++k) {
            st.advance_to(L[k], cfg.dt_operational);
            // map the sorted position back to the caller's t ordering
            const auto it = std::find(ts.begin(), ts.end(), sorted_ts[k]);
            const std::size_t orig = static_cast<std::size_t>(it - ts.begin());
            for (std::size_t pi = 0; pi < np; ++pi)
                samples[pi][orig][static_cast<std::size_t>(i)] = evaluate(ps[pi], st.state());
        }
    });

    std::vector<std::vector<EstimateResult>> out(np, std::vector<EstimateResult>(nt));
    for (std::size_t pi = 0; pi < np; ++pi)
        for (std::size_t k = 0; k < nt; ++k) out[pi][k] = reduce(samples[pi][k]);
    return out;
}

EstimateResult estimate_moment(const ModelSpec& model, const PolyVec& p, const Eigen::VectorXd& x0,
                               double t, double alpha, const SimConfig& cfg) {
    return estimate_moments(model, {p}, x0, {t}, alpha, cfg)[0][0];
}

EstimateResult estimate_cross_moment(const ModelSpec& model, const PolyVec& p, const PolyVec& q,
                                     double s, double t, double alpha, const SimConfig& cfg) {
    validate(cfg);
    if (s < 0.0 || t < 0.0) throw std::invalid_argument("estimate_cross_moment: negative times");
    if (t + s > cfg.horizon)
        throw std::invalid_argument("estimate_cross_moment: calendar time beyond the horizon");
    const std::size_t n = static_cast<std::size_t>(cfg.n_paths);
    std::vector<double> samples(n);
    run_paths(cfg.n_paths, cfg.jobs, [&](long i) {
        std::mt19937_64 rng(path_seed(cfg.seed, i));
        const Eigen::VectorXd x0 = stationary_sample(model, cfg.dt_operational, rng);
        LStream ls(alpha, cfg.dt_subordinator, rng);
        const double Lt = ls.at(t);
        const double Lts = (s == 0.0) ? Lt : ls.at(t + s);
        ModelStepper st(model, x0, rng);
        st.advance_to(Lt, cfg.dt_operational);
        const double qv = evaluate(q, st.state());
        st.advance_to(Lts, cfg.dt_operational);
        samples[static_cast<std::size_t>(i)] = evaluate(p, st.state()) * qv;
    });
    return reduce(samples);
}

std::vector<std::vector<EstimateResult>> estimate_increment_laplace_grid(
    double alpha, const std::vector<double>& betas,
    const std::vector<std::pair<double, double>>& st_pairs, const SimConfig& cfg) {
    validate(cfg);
    if (betas.empty() || st_pairs.empty())
        throw std::invalid_argument("estimate_increment_laplace: empty grid");
    std::vector<double> levels;
    for (const auto& [s, t] : st_pairs) {
        if (s < 0.0 || t < 0.0)
            throw std::invalid_argument("estimate_increment_laplace: negative times");
        if (t + s > cfg.horizon)
            throw std::invalid_argument("estimate_increment_laplace: time beyond the horizon");
        levels.push_back(t);
        levels.push_back(t + s);
    }
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    const std::size_t nb = betas.size(), npair = st_pairs.size(),
                      n = static_cast<std::size_t>(cfg.n_paths);
    std::vector<std::vector<std::vector<double>>> samples(
        nb, std::vector<std::vector<double>>(npair, std::vector<double>(n)));

    run_paths(cfg.n_paths, cfg.jobs, [&](long i) {
        std::mt19937_64 rng(path_seed(cfg.seed, i));
        LStream ls(alpha, cfg.dt_subordinator, rng);
        std::map<double, double> L;
        for (double lvl : levels) L[lvl] = ls.at(lvl);
        for (std::size_t pi = 0; pi < npair; ++pi) {
            const double inc = L[st_pairs[pi].second + st_pairs[pi].first] - L[st_pairs[pi].second];
            for (std::size_t bi = 0; bi < nb; ++bi)
                samples[bi][pi][static_cast<std::size_t>(i)] = std::exp(-betas[bi] * inc);
        }
    });

    std::vector<std::vector<EstimateResult>> out(nb, std::vector<EstimateResult>(npair));
    for (std::size_t bi = 0; bi < nb; ++bi)
        for (std::size_t pi = 0; pi < npair; ++pi) out[bi][pi] = reduce(samples[bi][pi]);
    return out;
}

EstimateResult estimate_increment_laplace(double alpha, double beta, double s, double t,
                                          const SimConfig& cfg) {
    return estimate_increment_laplace_grid(alpha, {beta}, {{s, t}}, cfg)[0][0];
}

double pairwise_sum(const double* data, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += data[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

}  // namespace polyfrac
