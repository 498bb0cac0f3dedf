#ifndef PROJREG_PENALTY_HPP
#define PROJREG_PENALTY_HPP

#include <projreg/numerics.hpp>
#include <projreg/sampler.hpp>

#include <span>
#include <string>
#include <vector>

namespace projreg {

enum class PenaltyFamily {
	L1,
	L2,              ///< lambda * ||w||_2 (the norm, not its square)
	ProposedSqrt,    ///< lambda' * sum_s ||w . I_s||_2
	ProposedSquared  ///< lambda' * sum_s ||w . I_s||_2^2
};

std::string to_string(PenaltyFamily family);

struct PenaltySpec {
	PenaltyFamily family = PenaltyFamily::ProposedSquared;
	double lambda = 0.0;
	/// When set, lambda' = counter_scale * lambda / max_j counts[j].
	bool normalize_by_counter = true;
	double counter_scale = 1.0;
};

struct PenaltyResult {
	double value = 0.0;
	Vector gradient;
	double lambda_effective = 0.0;
	std::vector<ProjectionMask> masks_used;
};

PenaltyResult penalty_l1(std::span<const double> w, double lambda);
PenaltyResult penalty_l2(std::span<const double> w, double lambda);

/**
 * Projected penalty over a fixed set of masks.
 *
 * Masks are constants for differentiation. For the sqrt family an experiment
 * whose projected norm is zero contributes a zero subgradient. If the counter
 * is all zeros nothing was selected: the value is 0 and lambda_effective is
 * reported as spec.lambda.
 */
PenaltyResult penalty_proposed(std::span<const double> w, std::span<const ProjectionMask> masks,
		const IndexCounter &counter, const PenaltySpec &spec);

/// Dispatch on spec.family. Masks and counter are ignored for L1/L2.
PenaltyResult evaluate_penalty(std::span<const double> w, std::span<const ProjectionMask> masks,
		const IndexCounter &counter, const PenaltySpec &spec);

/// Max relative error between the analytic gradient and central differences
/// with step 1e-6 * max(1, |w_j|). Relative error is |a - n| / max(|a|, |n|, 1e-6).
double penalty_gradient_check(std::span<const double> w, std::span<const ProjectionMask> masks,
		const IndexCounter &counter, const PenaltySpec &spec);

} // namespace projreg

#endif // PROJREG_PENALTY_HPP
