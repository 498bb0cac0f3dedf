#ifndef PROJREG_ANALYSIS_HPP
#define PROJREG_ANALYSIS_HPP

#include <projreg/numerics.hpp>
#include <projreg/sampler.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace projreg {

/// Exact expectations under independent Bernoulli(1 - T) coordinate selection.
struct JensenCheck {
	double exact_lhs = 0.0; ///< E ||w . I||_2
	double exact_rhs = 0.0; ///< sqrt(E ||w . I||_2^2) = sqrt((1 - T) sum w_j^2)
	bool holds() const noexcept { return exact_lhs <= exact_rhs; }
};

/// Enumerates all 2^N masks. Throws Error("use Monte Carlo path") for N > 20.
JensenCheck verify_jensen_small(std::span<const double> w, double threshold);

/**
 * Monte Carlo check of E ||w . I_s||_2 <= sqrt((1 - T) * sum w_j^2).
 *
 * `bound_rhs_scaled` is sqrt(s_p * S * (1 - T) / N) * ||w||_2, the constant
 * that appears in the original derivation. It mixes the experiment count into
 * a per-expectation bound, so it is reported for comparison and never
 * asserted on.
 */
struct BoundReport {
	double mc_mean_lhs = 0.0;
	double mc_std_error = 0.0;
	double analytic_rhs = 0.0;
	double bound_rhs_scaled = 0.0;
	int experiments = 0;
	std::uint64_t seed = 0;
	double tolerance = 0.0;
	bool holds = false;
};

/// cfg.selection_mode must be UniformThreshold.
BoundReport verify_bound_mc(std::span<const double> w, const SamplerConfig &cfg, std::uint64_t seed, double tolerance);

struct Histogram {
	double density = 0.0; ///< s_p the masks were drawn with
	int experiments = 0;
	std::vector<double> bin_edges;
	std::vector<std::uint64_t> counts;
	std::vector<double> norms; ///< per-experiment ||w . I_s||_2, in experiment order

	/// Sum of the counts of every bin lying entirely at or below `limit`.
	std::uint64_t count_below(double limit) const;
};

/// `bins` uniform bins over [0, hi]; hi may be +infinity only when bins == 1.
std::vector<double> uniform_edges(int bins, double hi);

/**
 * Draws `experiments` masks with momentum disabled and bins the projected
 * norms. Values outside the edges are clamped into the first/last bin, so
 * the counts always sum to `experiments`. Default edges: 50 bins over
 * [0, ||w||_2].
 */
Histogram norm_histogram(std::span<const double> w, const SamplerConfig &cfg, int experiments, std::uint64_t seed,
		std::optional<std::vector<double>> bin_edges = std::nullopt);

struct SweepRow {
	double density = 0.0;
	double r_l1 = 0.0;
	double r_l2 = 0.0;
	double r_proposed = 0.0;
};

/// Unit-L2 vector of length n with ceil(density * n) equal-magnitude nonzeros at seeded positions.
Vector equal_magnitude_vector(std::size_t n, double density, Rng &rng);

/// L1, L2 and the counter-normalized ProposedSqrt penalty of equal_magnitude_vector at each density.
std::vector<SweepRow> penalty_density_sweep(std::size_t n, std::span<const double> densities, const SamplerConfig &cfg,
		std::uint64_t seed);

/// `points` log-spaced values from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int points);

} // namespace projreg

#endif // PROJREG_ANALYSIS_HPP
