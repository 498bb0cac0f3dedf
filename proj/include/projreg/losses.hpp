#ifndef PROJREG_LOSSES_HPP
#define PROJREG_LOSSES_HPP

#include <projreg/numerics.hpp>
#include <projreg/sampler.hpp>

#include <span>

namespace projreg {

struct LossValue {
	double value = 0.0;
	Vector gradient; ///< with respect to the loss input
};

/// sum (y - y_hat)^2 / n, gradient 2 (y_hat - y) / n.
LossValue loss_mse(std::span<const double> pred, std::span<const double> target);

/// -log softmax(logits)[true_class], gradient softmax - onehot.
LossValue loss_ce(std::span<const double> logits, std::size_t true_class);

struct ProjectedLoss {
	double value = 0.0;
	Vector gradient;
	ProjectionMask selection;  ///< classes the loss was computed over (true class included)
	Vector distribution;       ///< sampling distribution the selection was drawn from
};

/// Cross-entropy of the softmax renormalized over `selection` plus the true class.
/// The gradient is zero outside that set.
ProjectedLoss projected_ce_over(std::span<const double> logits, std::size_t true_class, const ProjectionMask &selection);

/**
 * Projected cross-entropy: the logits play the role of the weights in the
 * sampling distribution. One experiment is drawn from `rng` (cfg.experiments
 * is ignored), the true class is added to the selection, and the loss is
 * computed over the union.
 */
ProjectedLoss loss_projected_ce(std::span<const double> logits, std::size_t true_class, const SamplerConfig &cfg,
		const SamplerState &state, Rng &rng);

} // namespace projreg

#endif // PROJREG_LOSSES_HPP
