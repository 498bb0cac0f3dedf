#include <projreg/penalty.hpp>

#include <algorithm>
#include <cmath>

namespace projreg {

namespace {
	double sign(double v) noexcept
	{
		return (v > 0.0) ? 1.0 : ((v < 0.0) ? -1.0 : 0.0);
	}

	double projected_sq_norm(std::span<const double> w, const ProjectionMask &mask)
	{
		double sum = 0.0;
		for (std::size_t j = 0; j < w.size(); j++)
			if (mask.indicators[j])
				sum += w[j] * w[j];
		return sum;
	}
}

std::string to_string(PenaltyFamily family)
{
	switch (family) {
		case PenaltyFamily::L1:
			return "l1";
		case PenaltyFamily::L2:
			return "l2";
		case PenaltyFamily::ProposedSqrt:
			return "proposed-sqrt";
		case PenaltyFamily::ProposedSquared:
			return "proposed-squared";
	}
	return "?";
}

PenaltyResult penalty_l1(std::span<const double> w, double lambda)
{
	PenaltyResult r;
	r.lambda_effective = lambda;
	r.gradient.resize(w.size());
	for (std::size_t j = 0; j < w.size(); j++)
		r.gradient[j] = lambda * sign(w[j]);
	r.value = lambda * l1_norm(w);
	return r;
}

PenaltyResult penalty_l2(std::span<const double> w, double lambda)
{
	PenaltyResult r;
	r.lambda_effective = lambda;
	r.gradient.assign(w.size(), 0.0);
	const double norm = l2_norm(w);
	r.value = lambda * norm;
	if (norm > 0.0)
		for (std::size_t j = 0; j < w.size(); j++)
			r.gradient[j] = lambda * w[j] / norm;
	return r;
}

PenaltyResult penalty_proposed(std::span<const double> w, std::span<const ProjectionMask> masks,
		const IndexCounter &counter, const PenaltySpec &spec)
{
	if (spec.family != PenaltyFamily::ProposedSqrt && spec.family != PenaltyFamily::ProposedSquared)
		throw Error("penalty_proposed: family must be proposed-sqrt or proposed-squared");
	if (spec.lambda < 0.0)
		throw Error("penalty_proposed: lambda must be non-negative");
	for (const auto &m : masks)
		if (m.size() != w.size())
			throw Error("penalty_proposed: mask length " + std::to_string(m.size()) + " does not match weight length "
					+ std::to_string(w.size()));
	if (counter.counts.size() != w.size())
		throw Error("penalty_proposed: counter length does not match weight length");

	PenaltyResult r;
	r.gradient.assign(w.size(), 0.0);
	r.masks_used.assign(masks.begin(), masks.end());
	const std::uint32_t max_count = counter.max();
	r.lambda_effective = spec.lambda;
	if (max_count == 0)
		return r;
	if (spec.normalize_by_counter)
		r.lambda_effective = spec.counter_scale * spec.lambda / static_cast<double>(max_count);

	// fixed-order reduction over experiments keeps results bit-reproducible
	double total = 0.0;
	for (const auto &mask : masks) {
		const double sq = projected_sq_norm(w, mask);
		if (spec.family == PenaltyFamily::ProposedSquared) {
			total += sq;
			for (std::size_t j = 0; j < w.size(); j++)
				if (mask.indicators[j])
					r.gradient[j] += 2.0 * w[j];
		} else {
			const double norm = std::sqrt(sq);
			total += norm;
			if (norm > 0.0)
				for (std::size_t j = 0; j < w.size(); j++)
					if (mask.indicators[j])
						r.gradient[j] += w[j] / norm;
		}
	}
	r.value = r.lambda_effective * total;
	for (auto &g : r.gradient)
		g *= r.lambda_effective;
	return r;
}

PenaltyResult evaluate_penalty(std::span<const double> w, std::span<const ProjectionMask> masks,
		const IndexCounter &counter, const PenaltySpec &spec)
{
	switch (spec.family) {
		case PenaltyFamily::L1:
			return penalty_l1(w, spec.lambda);
		case PenaltyFamily::L2:
			return penalty_l2(w, spec.lambda);
		case PenaltyFamily::ProposedSqrt:
		case PenaltyFamily::ProposedSquared:
			return penalty_proposed(w, masks, counter, spec);
	}
	throw Error("evaluate_penalty: unknown family");
}

double penalty_gradient_check(std::span<const double> w, std::span<const ProjectionMask> masks,
		const IndexCounter &counter, const PenaltySpec &spec)
{
	const Vector analytic = evaluate_penalty(w, masks, counter, spec).gradient;
	Vector probe(w.begin(), w.end());
	double worst = 0.0;
	for (std::size_t j = 0; j < w.size(); j++) {
		const double h = 1e-6 * std::max(1.0, std::fabs(w[j]));
		probe[j] = w[j] + h;
		const double up = evaluate_penalty(probe, masks, counter, spec).value;
		probe[j] = w[j] - h;
		const double down = evaluate_penalty(probe, masks, counter, spec).value;
		probe[j] = w[j];
		const double numeric = (up - down) / (2.0 * h);
		const double scale = std::max({std::fabs(analytic[j]), std::fabs(numeric), 1e-6});
		worst = std::max(worst, std::fabs(analytic[j] - numeric) / scale);
	}
	return worst;
}

} // namespace projreg
