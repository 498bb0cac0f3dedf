#include <projreg/analysis.hpp>
#include <projreg/penalty.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace projreg {

namespace {
	double projected_norm(std::span<const double> w, const ProjectionMask &mask)
	{
		double sum = 0.0;
		for (std::size_t j = 0; j < w.size(); j++)
			if (mask.indicators[j])
				sum += w[j] * w[j];
		return std::sqrt(sum);
	}

	std::size_t nonzero_count(std::size_t n, double density)
	{
		SamplerConfig probe;
		probe.density = density;
		return std::max<std::size_t>(1, probe.mask_size(n));
	}
}

JensenCheck verify_jensen_small(std::span<const double> w, double threshold)
{
	if (w.size() > 20)
		throw Error("use Monte Carlo path");
	if (!(threshold >= 0.0 && threshold < 1.0))
		throw Error("verify_jensen_small: threshold must lie in [0, 1)");
	const std::size_t n = w.size();
	const double keep = 1.0 - threshold;

	JensenCheck out;
	const std::uint64_t masks = std::uint64_t{1} << n;
	for (std::uint64_t bits = 0; bits < masks; bits++) {
		double sq = 0.0;
		int selected = 0;
		for (std::size_t j = 0; j < n; j++)
			if (bits >> j & 1) {
				sq += w[j] * w[j];
				selected++;
			}
		const double prob = std::pow(keep, selected) * std::pow(threshold, static_cast<int>(n) - selected);
		out.exact_lhs += prob * std::sqrt(sq);
	}
	double total_sq = 0.0;
	for (double v : w)
		total_sq += v * v;
	out.exact_rhs = std::sqrt(keep * total_sq);
	return out;
}

BoundReport verify_bound_mc(std::span<const double> w, const SamplerConfig &cfg, std::uint64_t seed, double tolerance)
{
	if (cfg.selection_mode != SelectionMode::UniformThreshold)
		throw Error("verify_bound_mc: the bound assumes uniform-threshold selection");
	cfg.validate();
	const MaskDraw draw = draw_masks(w, cfg, SamplerState{}, Rng(seed));

	BoundReport r;
	r.experiments = cfg.experiments;
	r.seed = seed;
	r.tolerance = tolerance;
	double sum = 0.0;
	double sum_sq = 0.0;
	for (const auto &mask : draw.masks) {
		const double norm = projected_norm(w, mask);
		sum += norm;
		sum_sq += norm * norm;
	}
	const double count = static_cast<double>(cfg.experiments);
	r.mc_mean_lhs = sum / count;
	if (cfg.experiments > 1) {
		const double var = std::max(0.0, (sum_sq - count * r.mc_mean_lhs * r.mc_mean_lhs) / (count - 1.0));
		r.mc_std_error = std::sqrt(var / count);
	}
	const double norm = l2_norm(w);
	const double keep = 1.0 - cfg.threshold;
	r.analytic_rhs = std::sqrt(keep) * norm;
	r.bound_rhs_scaled = std::sqrt(cfg.density * count * keep / static_cast<double>(w.size())) * norm;
	r.holds = r.mc_mean_lhs <= r.analytic_rhs * (1.0 + tolerance);
	return r;
}

std::uint64_t Histogram::count_below(double limit) const
{
	std::uint64_t total = 0;
	for (std::size_t b = 0; b < counts.size(); b++)
		if (bin_edges[b + 1] <= limit * (1.0 + 1e-12))
			total += counts[b];
	return total;
}

std::vector<double> uniform_edges(int bins, double hi)
{
	if (bins < 1)
		throw Error("histogram needs at least one bin");
	if (std::isinf(hi)) {
		if (bins != 1)
			throw Error("an unbounded histogram range needs exactly one bin");
		return {0.0, hi};
	}
	if (!(hi > 0.0))
		throw Error("histogram upper edge must be positive");
	std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
	for (int i = 0; i <= bins; i++)
		edges[static_cast<std::size_t>(i)] = hi * static_cast<double>(i) / static_cast<double>(bins);
	return edges;
}

Histogram norm_histogram(std::span<const double> w, const SamplerConfig &cfg, int experiments, std::uint64_t seed,
		std::optional<std::vector<double>> bin_edges)
{
	if (experiments < 1)
		throw Error("norm_histogram: experiments must be positive");
	SamplerConfig local = cfg;
	local.momentum = false;
	local.experiments = 1;
	local.validate();
	if (w.empty())
		throw Error("norm_histogram: empty weight vector");

	Histogram h;
	h.density = cfg.density;
	h.experiments = experiments;
	h.bin_edges = bin_edges ? std::move(*bin_edges) : uniform_edges(50, std::max(l2_norm(w), 1e-300));
	if (h.bin_edges.size() < 2)
		throw Error("norm_histogram: need at least two bin edges");
	for (std::size_t i = 1; i < h.bin_edges.size(); i++)
		if (!(h.bin_edges[i] > h.bin_edges[i - 1]))
			throw Error("norm_histogram: bin edges must be strictly increasing");
	h.counts.assign(h.bin_edges.size() - 1, 0);
	h.norms.reserve(static_cast<std::size_t>(experiments));

	const Rng root(seed);
	const SamplerState no_momentum;
	for (int e = 0; e < experiments; e++) {
		Rng stream = root.substream(static_cast<std::uint64_t>(e));
		const double norm = projected_norm(w, draw_experiment(w, local, no_momentum, stream));
		h.norms.push_back(norm);
		// bins are [lo, hi); the last one is closed
		auto it = std::upper_bound(h.bin_edges.begin(), h.bin_edges.end(), norm);
		std::ptrdiff_t bin = (it - h.bin_edges.begin()) - 1;
		bin = std::clamp<std::ptrdiff_t>(bin, 0, static_cast<std::ptrdiff_t>(h.counts.size()) - 1);
		h.counts[static_cast<std::size_t>(bin)]++;
	}
	return h;
}

Vector equal_magnitude_vector(std::size_t n, double density, Rng &rng)
{
	if (n == 0 || !(density > 0.0 && density <= 1.0))
		throw Error("equal_magnitude_vector: need n > 0 and density in (0, 1]");
	const std::size_t k = std::min(n, nonzero_count(n, density));
	std::vector<std::size_t> positions(n);
	for (std::size_t j = 0; j < n; j++)
		positions[j] = j;
	shuffle(positions, rng);
	Vector w(n, 0.0);
	const double magnitude = 1.0 / std::sqrt(static_cast<double>(k));
	for (std::size_t i = 0; i < k; i++)
		w[positions[i]] = magnitude;
	return w;
}

std::vector<SweepRow> penalty_density_sweep(std::size_t n, std::span<const double> densities, const SamplerConfig &cfg,
		std::uint64_t seed)
{
	cfg.validate();
	const Rng root(seed);
	PenaltySpec spec;
	spec.family = PenaltyFamily::ProposedSqrt;
	spec.lambda = 1.0;
	spec.normalize_by_counter = true;

	std::vector<SweepRow> rows;
	rows.reserve(densities.size());
	for (std::size_t i = 0; i < densities.size(); i++) {
		Rng placement = root.substream(2 * i);
		const Vector w = equal_magnitude_vector(n, densities[i], placement);
		const MaskDraw draw = draw_masks(w, cfg, SamplerState{}, root.substream(2 * i + 1));
		SweepRow row;
		row.density = densities[i];
		row.r_l1 = penalty_l1(w, 1.0).value;
		row.r_l2 = penalty_l2(w, 1.0).value;
		row.r_proposed = penalty_proposed(w, draw.masks, draw.counter, spec).value;
		rows.push_back(row);
	}
	return rows;
}

std::vector<double> log_grid(double lo, double hi, int points)
{
	if (points < 1 || !(lo > 0.0) || !(hi >= lo))
		throw Error("log_grid: need points >= 1 and 0 < lo <= hi");
	if (points == 1)
		return {lo};
	std::vector<double> grid(static_cast<std::size_t>(points));
	const double a = std::log10(lo);
	const double b = std::log10(hi);
	for (int i = 0; i < points; i++)
		grid[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (points - 1));
	grid.front() = lo;
	grid.back() = hi;
	return grid;
}

} // namespace projreg
