#include <projreg/losses.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace projreg {

LossValue loss_mse(std::span<const double> pred, std::span<const double> target)
{
	if (pred.size() != target.size())
		throw Error("loss_mse: length mismatch (" + std::to_string(pred.size()) + " vs " + std::to_string(target.size()) + ")");
	if (pred.empty())
		throw Error("loss_mse: empty input");
	const double n = static_cast<double>(pred.size());
	LossValue out;
	out.gradient.resize(pred.size());
	for (std::size_t i = 0; i < pred.size(); i++) {
		const double diff = pred[i] - target[i];
		out.value += diff * diff;
		out.gradient[i] = 2.0 * diff / n;
	}
	out.value /= n;
	return out;
}

LossValue loss_ce(std::span<const double> logits, std::size_t true_class)
{
	if (true_class >= logits.size())
		throw Error("loss_ce: class index " + std::to_string(true_class) + " out of range for "
				+ std::to_string(logits.size()) + " logits");
	const double top = *std::max_element(logits.begin(), logits.end());
	double total = 0.0;
	for (double z : logits)
		total += std::exp(z - top);
	const double log_norm = top + std::log(total);

	LossValue out;
	out.value = log_norm - logits[true_class];
	out.gradient.resize(logits.size());
	for (std::size_t k = 0; k < logits.size(); k++)
		out.gradient[k] = std::exp(logits[k] - log_norm);
	out.gradient[true_class] -= 1.0;
	return out;
}

ProjectedLoss projected_ce_over(std::span<const double> logits, std::size_t true_class, const ProjectionMask &selection)
{
	if (true_class >= logits.size())
		throw Error("loss_projected_ce: class index " + std::to_string(true_class) + " out of range for "
				+ std::to_string(logits.size()) + " logits");
	if (selection.size() != logits.size())
		throw Error("loss_projected_ce: selection length does not match logits");

	ProjectedLoss out;
	out.selection = selection;
	if (!out.selection.indicators[true_class]) {
		out.selection.indicators[true_class] = 1;
		out.selection.selected_count++;
	}
	const auto &keep = out.selection.indicators;

	double top = -std::numeric_limits<double>::infinity();
	for (std::size_t k = 0; k < logits.size(); k++)
		if (keep[k])
			top = std::max(top, logits[k]);
	double total = 0.0;
	for (std::size_t k = 0; k < logits.size(); k++)
		if (keep[k])
			total += std::exp(logits[k] - top);
	const double log_norm = top + std::log(total);

	out.value = log_norm - logits[true_class];
	out.gradient.assign(logits.size(), 0.0);
	for (std::size_t k = 0; k < logits.size(); k++)
		if (keep[k])
			out.gradient[k] = std::exp(logits[k] - log_norm);
	out.gradient[true_class] -= 1.0;
	return out;
}

ProjectedLoss loss_projected_ce(std::span<const double> logits, std::size_t true_class, const SamplerConfig &cfg,
		const SamplerState &state, Rng &rng)
{
	if (true_class >= logits.size())
		throw Error("loss_projected_ce: class index " + std::to_string(true_class) + " out of range for "
				+ std::to_string(logits.size()) + " logits");
	require_finite(logits, "loss_projected_ce");
	cfg.validate();
	Vector distribution;
	const ProjectionMask sampled = draw_experiment(logits, cfg, state, rng, &distribution);
	ProjectedLoss out = projected_ce_over(logits, true_class, sampled);
	out.distribution = std::move(distribution);
	return out;
}

} // namespace projreg
