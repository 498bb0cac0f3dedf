#include <projreg/sampler.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace projreg {

namespace {
	constexpr double probability_tolerance = 1e-9;

	bool is_probability_vector(std::span<const double> p)
	{
		double total = 0.0;
		for (double v : p) {
			if (!(v >= 0.0 && v <= 1.0 + probability_tolerance))
				return false;
			total += v;
		}
		return std::fabs(total - 1.0) <= probability_tolerance;
	}

	// strict total order: higher key first, lower index on ties
	std::vector<std::size_t> top_indices(std::span<const double> keys, std::size_t k)
	{
		std::vector<std::size_t> order(keys.size());
		std::iota(order.begin(), order.end(), std::size_t{0});
		const auto before = [&](std::size_t a, std::size_t b) {
			if (keys[a] != keys[b])
				return keys[a] > keys[b];
			return a < b;
		};
		const auto kth = order.begin() + static_cast<std::ptrdiff_t>(k);
		if (k < order.size())
			std::nth_element(order.begin(), kth, order.end(), before);
		order.resize(k);
		std::sort(order.begin(), order.end(), before);
		return order;
	}

	// open interval (0, 1)
	double open_uniform(Rng &rng)
	{
		return (static_cast<double>(rng.next_u64() >> 11) + 0.5) * 0x1.0p-53;
	}

	// Successive sampling proportional to p without replacement. Duplicates are
	// redrawn, which conditions each draw on the unselected coordinates; when the
	// selected mass makes that slow, an exponential race (the k smallest
	// E_j / p_j, E_j ~ Exp(1)) finishes with the same distribution.
	ProjectionMask weighted_without_replacement(std::span<const double> p, std::size_t k, Rng &rng)
	{
		const std::size_t n = p.size();
		Vector cumulative(n);
		double running = 0.0;
		std::size_t support = 0;
		for (std::size_t j = 0; j < n; j++) {
			running += p[j];
			cumulative[j] = running;
			support += p[j] > 0.0;
		}
		if (support < k)
			throw Error("weighted draw: fewer coordinates with positive probability than the mask size");

		ProjectionMask mask;
		mask.indicators.assign(n, 0);
		const std::size_t budget = 4 * k + 64;
		for (std::size_t attempt = 0; mask.selected_count < k && attempt < budget; attempt++) {
			const double target = rng.uniform() * running;
			const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
			std::size_t j = std::min(static_cast<std::size_t>(it - cumulative.begin()), n - 1);
			// a zero-probability slot shares its cumulative value with the last positive one
			while (p[j] <= 0.0)
				j = (j == 0) ? n - 1 : j - 1;
			if (!mask.indicators[j]) {
				mask.indicators[j] = 1;
				mask.selected_count++;
			}
		}
		if (mask.selected_count == k)
			return mask;

		Vector keys(n);
		for (std::size_t j = 0; j < n; j++)
			keys[j] = (p[j] > 0.0 && !mask.indicators[j]) ? std::log(open_uniform(rng)) / p[j]
					: -std::numeric_limits<double>::infinity();
		for (std::size_t j : top_indices(keys, k - mask.selected_count)) {
			mask.indicators[j] = 1;
			mask.selected_count++;
		}
		return mask;
	}
}

std::string to_string(ScoreMode mode)
{
	switch (mode) {
		case ScoreMode::MagnitudeIncreasing:
			return "magnitude";
		case ScoreMode::PaperLiteral:
			return "literal";
	}
	return "?";
}

std::string to_string(SelectionMode mode)
{
	switch (mode) {
		case SelectionMode::TopK:
			return "topk";
		case SelectionMode::ProbabilityThreshold:
			return "prob-threshold";
		case SelectionMode::UniformThreshold:
			return "uniform-threshold";
		case SelectionMode::WeightedDraw:
			return "weighted";
	}
	return "?";
}

ScoreMode parse_score_mode(const std::string &text)
{
	if (text == "magnitude")
		return ScoreMode::MagnitudeIncreasing;
	if (text == "literal")
		return ScoreMode::PaperLiteral;
	throw Error("unknown score mode '" + text + "' (expected magnitude|literal)");
}

SelectionMode parse_selection_mode(const std::string &text)
{
	if (text == "topk")
		return SelectionMode::TopK;
	if (text == "prob-threshold")
		return SelectionMode::ProbabilityThreshold;
	if (text == "uniform-threshold")
		return SelectionMode::UniformThreshold;
	if (text == "weighted")
		return SelectionMode::WeightedDraw;
	throw Error("unknown selection mode '" + text + "' (expected topk|prob-threshold|uniform-threshold|weighted)");
}

void SamplerConfig::validate() const
{
	if (!(density > 0.0 && density <= 1.0))
		throw Error("sampling density must lie in (0, 1], got " + std::to_string(density));
	if (experiments < 1)
		throw Error("number of experiments must be positive, got " + std::to_string(experiments));
	if (!(threshold >= 0.0 && threshold < 1.0))
		throw Error("threshold must lie in [0, 1), got " + std::to_string(threshold));
	if (!(alpha >= 0.0 && alpha <= 1.0))
		throw Error("momentum alpha must lie in [0, 1], got " + std::to_string(alpha));
}

std::size_t SamplerConfig::mask_size(std::size_t n) const
{
	// absorb representation error so that e.g. 0.07 * 100 gives 7, not 8
	const double exact = density * static_cast<double>(n);
	return static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
}

Vector SamplerState::previous(std::size_t n) const
{
	if (!m_initialized)
		return Vector(n, 1.0 / static_cast<double>(n));
	return m_previous;
}

void SamplerState::commit(std::span<const double> distribution)
{
	if (!is_probability_vector(distribution))
		throw Error("SamplerState::commit: argument is not a probability vector");
	m_previous.assign(distribution.begin(), distribution.end());
	m_initialized = true;
}

ProjectionMask ProjectionMask::from_indices(std::size_t n, std::span<const std::size_t> indices)
{
	ProjectionMask mask;
	mask.indicators.assign(n, 0);
	for (std::size_t j : indices) {
		if (j >= n)
			throw Error("ProjectionMask: index out of range");
		if (!mask.indicators[j]) {
			mask.indicators[j] = 1;
			mask.selected_count++;
		}
	}
	return mask;
}

ProjectionMask ProjectionMask::full(std::size_t n)
{
	ProjectionMask mask;
	mask.indicators.assign(n, 1);
	mask.selected_count = n;
	return mask;
}

void IndexCounter::add(const ProjectionMask &mask)
{
	if (mask.size() != counts.size())
		throw Error("IndexCounter: mask length mismatch");
	for (std::size_t j = 0; j < counts.size(); j++)
		counts[j] += mask.indicators[j];
}

std::uint32_t IndexCounter::max() const noexcept
{
	return counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
}

std::uint64_t IndexCounter::total() const noexcept
{
	return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

IndexCounter IndexCounter::of(std::span<const ProjectionMask> masks)
{
	IndexCounter counter(masks.empty() ? 0 : masks.front().size());
	for (const auto &m : masks)
		counter.add(m);
	return counter;
}

Vector score_distribution(std::span<const double> w, double p_s, ScoreMode mode)
{
	Vector scores(w.size());
	for (std::size_t j = 0; j < w.size(); j++)
		scores[j] = (mode == ScoreMode::MagnitudeIncreasing) ? p_s * std::fabs(w[j]) : -p_s * w[j];
	return stable_softmax(scores);
}

Vector apply_momentum(std::span<const double> current, const SamplerState &state, double alpha)
{
	const Vector previous = state.previous(current.size());
	if (previous.size() != current.size())
		throw Error("apply_momentum: length mismatch (" + std::to_string(current.size()) + " vs "
				+ std::to_string(previous.size()) + ")");
	Vector out(current.size());
	for (std::size_t j = 0; j < out.size(); j++)
		out[j] = alpha * current[j] + (1.0 - alpha) * previous[j];
	return out;
}

ProjectionMask select_mask(std::span<const double> probabilities, const SamplerConfig &cfg, Rng &rng)
{
	const std::size_t n = probabilities.size();
	switch (cfg.selection_mode) {
		case SelectionMode::TopK: {
			const auto picked = top_indices(probabilities, cfg.mask_size(n));
			return ProjectionMask::from_indices(n, picked);
		}
		case SelectionMode::WeightedDraw: {
			return weighted_without_replacement(probabilities, cfg.mask_size(n), rng);
		}
		case SelectionMode::ProbabilityThreshold: {
			const double cutoff = cfg.threshold / static_cast<double>(n);
			std::vector<std::size_t> picked;
			for (std::size_t j = 0; j < n; j++)
				if (probabilities[j] > cutoff)
					picked.push_back(j);
			return ProjectionMask::from_indices(n, picked);
		}
		case SelectionMode::UniformThreshold: {
			std::vector<std::size_t> picked;
			for (std::size_t j = 0; j < n; j++)
				if (rng.uniform() > cfg.threshold)
					picked.push_back(j);
			return ProjectionMask::from_indices(n, picked);
		}
	}
	throw Error("select_mask: unknown selection mode");
}

ProjectionMask draw_experiment(std::span<const double> w, const SamplerConfig &cfg, const SamplerState &state,
		Rng &stream, Vector *distribution)
{
	const std::size_t n = w.size();
	const double p_s = stream.uniform();
	Vector probabilities;
	if (cfg.selection_mode == SelectionMode::UniformThreshold)
		probabilities.assign(n, 1.0 / static_cast<double>(n));
	else {
		probabilities = score_distribution(w, p_s, cfg.score_mode);
		if (cfg.momentum)
			probabilities = apply_momentum(probabilities, state, cfg.alpha);
	}
	ProjectionMask mask = select_mask(probabilities, cfg, stream);
	if (distribution)
		*distribution = std::move(probabilities);
	return mask;
}

MaskDraw draw_masks(std::span<const double> w, const SamplerConfig &cfg, const SamplerState &state, const Rng &rng)
{
	if (w.empty())
		throw Error("draw_masks: empty weight vector");
	const std::size_t n = w.size();
	const bool fixed_size = cfg.selection_mode == SelectionMode::TopK || cfg.selection_mode == SelectionMode::WeightedDraw;
	if (fixed_size && cfg.density > 0.0 && cfg.mask_size(n) > n)
		throw Error("sampling density exceeds vector length");
	cfg.validate();
	require_finite(w, "draw_masks");

	MaskDraw draw;
	draw.counter = IndexCounter(n);
	draw.distribution.assign(n, 0.0);
	draw.masks.reserve(static_cast<std::size_t>(cfg.experiments));
	Vector probabilities;
	Vector first;
	bool all_equal = true;
	for (int s = 0; s < cfg.experiments; s++) {
		Rng stream = rng.substream(static_cast<std::uint64_t>(s));
		draw.masks.push_back(draw_experiment(w, cfg, state, stream, &probabilities));
		draw.counter.add(draw.masks.back());
		for (std::size_t j = 0; j < n; j++)
			draw.distribution[j] += probabilities[j];
		if (s == 0)
			first = probabilities;
		else
			all_equal = all_equal && probabilities == first;
	}
	// identical experiments (alpha = 0, uniform selection) keep the exact vector
	if (all_equal)
		draw.distribution = std::move(first);
	else
		for (auto &p : draw.distribution)
			p /= static_cast<double>(cfg.experiments);
	return draw;
}

} // namespace projreg
