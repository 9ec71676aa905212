#pragma once

#include "polyfrac/models.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace polyfrac {

struct SimConfig {
    long n_paths = 100000;
    double dt_operational = 1e-3;   // Euler step of the outer process
    double dt_subordinator = 1e-3;  // step of the stable path
    std::uint64_t seed = 1;
    double horizon = 200.0;  // max calendar time before truncation is reported
    int jobs = 1;
};

void validate(const SimConfig& cfg);

struct EstimateResult {
    double estimate = 0.0;
    double std_error = 0.0;
};

struct PathBundle {
    std::vector<double> calendar_times;
    std::vector<std::vector<double>> L_samples;  // [path][time index]
    std::vector<std::vector<double>> X_samples;  // [path][time index], X at L
};

/// splitmix64 of (master ^ golden-ratio * (index+1)): one independent stream
/// per path, so thread partitioning cannot change results.
std::uint64_t path_seed(std::uint64_t master, long path_index);

/// n i.i.d. totally skewed positive alpha-stable increments with scale
/// ds^{1/alpha} (Kanter/Zolotarev sampler), so the running sum has Laplace
/// transform exp(-s lambda^alpha) at operational time s.
std::vector<double> simulate_stable_increments(double alpha, long n, double ds,
                                               std::mt19937_64& rng);

/// First-passage inversion: for each calendar t, the operational time at which
/// the cumulative path sigma (sigma[i] = value at (i+1) ds) first exceeds t,
/// linearly interpolated between the bracketing steps. Non-decreasing in t.
/// t beyond the path's range sets *truncated and returns the path horizon.
std::vector<double> invert_path(const std::vector<double>& sigma_cum,
                                const std::vector<double>& t_grid, double ds,
                                bool* truncated = nullptr);

/// Draws from the stationary law when it is classical (OU Gaussian, CIR Gamma,
/// Jacobi diffusion Beta); otherwise runs a burn-in of length 20 over the
/// slowest mean-reversion rate and returns the end state.
Eigen::VectorXd stationary_sample(const ModelSpec& model, double dt, std::mt19937_64& rng);

/// Euler-Maruyama path on the operational grid i*dt, i = 0..n_steps, with the
/// model guards (CIR diffusion clamp at 0, Jacobi clamp to [0,1] and Poisson
/// reflection jumps x -> 1-x, compensated compound-Poisson Levy-OU jumps).
/// clamp_rate, when non-null, receives the fraction of guarded steps.
std::vector<Eigen::VectorXd> simulate_model(const ModelSpec& model, const Eigen::VectorXd& x0,
                                            double operational_horizon, double dt,
                                            std::mt19937_64& rng, double* clamp_rate = nullptr);

/// Mean of p(X_{L_t}) over paths started at x0, for each polynomial and each
/// time; paths are shared across the whole grid. Result is [p index][t index].
std::vector<std::vector<EstimateResult>> estimate_moments(const ModelSpec& model,
                                                          const std::vector<PolyVec>& ps,
                                                          const Eigen::VectorXd& x0,
                                                          const std::vector<double>& ts,
                                                          double alpha, const SimConfig& cfg);

EstimateResult estimate_moment(const ModelSpec& model, const PolyVec& p, const Eigen::VectorXd& x0,
                               double t, double alpha, const SimConfig& cfg);

/// Mean of p(X_{L_{t+s}}) q(X_{L_t}) with a stationary start.
EstimateResult estimate_cross_moment(const ModelSpec& model, const PolyVec& p, const PolyVec& q,
                                     double s, double t, double alpha, const SimConfig& cfg);

/// Mean of exp(-beta (L_{t+s} - L_t)) on a (beta, (s,t)) grid; one path set
/// serves every grid entry. Result is [beta index][pair index].
std::vector<std::vector<EstimateResult>> estimate_increment_laplace_grid(
    double alpha, const std::vector<double>& betas,
    const std::vector<std::pair<double, double>>& st_pairs, const SimConfig& cfg);

EstimateResult estimate_increment_laplace(double alpha, double beta, double s, double t,
                                          const SimConfig& cfg);

/// Deterministic pairwise sum; thread partitioning never changes the result.
double pairwise_sum(const double* data, std::size_t n);

}  // namespace polyfrac
