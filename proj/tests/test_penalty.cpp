#include <projreg/penalty.hpp>

#include <doctest.h>

#include <cmath>

using namespace projreg;

namespace {
	std::vector<ProjectionMask> masks_of(std::initializer_list<std::vector<std::uint8_t>> rows)
	{
		std::vector<ProjectionMask> out;
		for (const auto &r : rows) {
			std::vector<std::size_t> idx;
			for (std::size_t j = 0; j < r.size(); j++)
				if (r[j])
					idx.push_back(j);
			out.push_back(ProjectionMask::from_indices(r.size(), idx));
		}
		return out;
	}

	PenaltySpec plain(PenaltyFamily family, double lambda = 1.0)
	{
		PenaltySpec spec;
		spec.family = family;
		spec.lambda = lambda;
		spec.normalize_by_counter = false;
		return spec;
	}

	Vector random_vector(Rng &r, std::size_t n)
	{
		Vector w(n);
		for (double &v : w)
			v = r.normal();
		return w;
	}

	std::vector<ProjectionMask> random_masks(Rng &r, std::size_t n, int count, double keep)
	{
		std::vector<ProjectionMask> out;
		for (int s = 0; s < count; s++) {
			std::vector<std::size_t> idx;
			for (std::size_t j = 0; j < n; j++)
				if (r.uniform() < keep)
					idx.push_back(j);
			out.push_back(ProjectionMask::from_indices(n, idx));
		}
		return out;
	}

	double proposed(const Vector &w, const std::vector<ProjectionMask> &masks, PenaltyFamily family)
	{
		return penalty_proposed(w, masks, IndexCounter::of(masks), plain(family)).value;
	}
}

TEST_CASE("l1 examples")
{
	CHECK(penalty_l1(Vector{3, -4}, 1.0).value == 7.0);
	const auto zero = penalty_l1(Vector{0, 0}, 1.0);
	CHECK(zero.value == 0.0);
	CHECK(zero.gradient == Vector{0, 0});
	CHECK(penalty_l1(Vector{3, -4}, 0.5).gradient == Vector{0.5, -0.5});
}

TEST_CASE("l2 examples")
{
	const auto r = penalty_l2(Vector{3, 4}, 1.0);
	CHECK(r.value == 5.0);
	CHECK(r.gradient[0] == doctest::Approx(0.6).epsilon(1e-15));
	CHECK(r.gradient[1] == doctest::Approx(0.8).epsilon(1e-15));
	const auto zero = penalty_l2(Vector{0, 0}, 1.0);
	CHECK(zero.value == 0.0);
	CHECK(zero.gradient == Vector{0, 0});
}

TEST_CASE("proposed penalty examples")
{
	const Vector w{3, -4};
	const auto basis = masks_of({{1, 0}, {0, 1}});
	CHECK(proposed(w, basis, PenaltyFamily::ProposedSqrt) == 7.0);

	const auto full = masks_of({{1, 1}});
	CHECK(proposed(w, full, PenaltyFamily::ProposedSqrt) == 5.0);

	CHECK(proposed(w, masks_of({{1, 0}, {1, 1}}), PenaltyFamily::ProposedSquared) == doctest::Approx(34.0).epsilon(1e-15));

	const auto one = masks_of({{1, 0}});
	const auto g = penalty_proposed(w, one, IndexCounter::of(one), plain(PenaltyFamily::ProposedSquared, 0.5));
	CHECK(g.gradient == Vector{3, 0});
	CHECK(g.lambda_effective == 0.5);

	CHECK_THROWS_AS(penalty_proposed(Vector{1, 2, 3}, one, IndexCounter::of(one), plain(PenaltyFamily::ProposedSqrt)),
			Error);
}

TEST_CASE("counter normalization")
{
	const Vector w{3, -4};
	const auto masks = masks_of({{1, 0}, {1, 1}, {1, 0}});
	PenaltySpec spec = plain(PenaltyFamily::ProposedSqrt, 6.0);
	spec.normalize_by_counter = true;
	const auto r = penalty_proposed(w, masks, IndexCounter::of(masks), spec);
	// max count is 3 (coordinate 0)
	CHECK(r.lambda_effective == 2.0);
	CHECK(r.value == doctest::Approx(2.0 * (3 + 5 + 3)).epsilon(1e-15));

	spec.counter_scale = 1.5;
	CHECK(penalty_proposed(w, masks, IndexCounter::of(masks), spec).lambda_effective == 3.0);

	const auto empty = masks_of({{0, 0}, {0, 0}});
	const auto z = penalty_proposed(w, empty, IndexCounter::of(empty), spec);
	CHECK(z.value == 0.0);
	CHECK(z.lambda_effective == 6.0);
	CHECK(z.gradient == Vector{0, 0});
}

TEST_CASE("sqrt singular experiments contribute a zero subgradient")
{
	const Vector w{0, 2};
	const auto masks = masks_of({{1, 0}, {1, 1}});
	const auto r = penalty_proposed(w, masks, IndexCounter::of(masks), plain(PenaltyFamily::ProposedSqrt));
	CHECK(r.value == 2.0);
	CHECK(r.gradient == Vector{0, 1});
}

TEST_CASE("gradient check oracles")
{
	Rng r(7);
	const auto w = random_vector(r, 50);
	const auto masks = random_masks(r, 50, 10, 0.3);
	const auto counter = IndexCounter::of(masks);
	CHECK(penalty_gradient_check(w, masks, counter, plain(PenaltyFamily::ProposedSquared)) < 1e-6);
	CHECK(penalty_gradient_check(w, masks, counter, plain(PenaltyFamily::ProposedSqrt)) < 1e-5);
	CHECK(penalty_gradient_check(Vector{3, 4}, {}, IndexCounter(2), plain(PenaltyFamily::L2)) < 1e-7);
	CHECK(penalty_gradient_check(w, {}, IndexCounter(50), plain(PenaltyFamily::L1)) < 1e-6);
}

TEST_CASE("penalty properties on random inputs")
{
	Rng r(99);
	for (int trial = 0; trial < 100; trial++) {
		const std::size_t n = 2 + r.below(30);
		const auto u = random_vector(r, n);
		const auto v = random_vector(r, n);
		const auto masks = random_masks(r, n, 1 + static_cast<int>(r.below(8)), 0.4);
		const double c = (r.uniform() - 0.5) * 6.0;
		Vector cu = u;
		Vector sum = u;
		for (std::size_t j = 0; j < n; j++) {
			cu[j] *= c;
			sum[j] += v[j];
		}

		const double sq = proposed(u, masks, PenaltyFamily::ProposedSqrt);
		const double sqd = proposed(u, masks, PenaltyFamily::ProposedSquared);
		REQUIRE(sq >= 0.0);
		REQUIRE(sqd >= 0.0);
		REQUIRE(penalty_l1(u, 1).value >= 0.0);
		REQUIRE(penalty_l2(u, 1).value >= 0.0);

		REQUIRE(proposed(cu, masks, PenaltyFamily::ProposedSqrt) == doctest::Approx(std::fabs(c) * sq).epsilon(1e-12));
		REQUIRE(proposed(cu, masks, PenaltyFamily::ProposedSquared) == doctest::Approx(c * c * sqd).epsilon(1e-12));

		REQUIRE(proposed(sum, masks, PenaltyFamily::ProposedSqrt)
				<= proposed(u, masks, PenaltyFamily::ProposedSqrt) + proposed(v, masks, PenaltyFamily::ProposedSqrt) + 1e-12);

		auto more = masks;
		more.push_back(random_masks(r, n, 1, 0.5).front());
		REQUIRE(proposed(u, more, PenaltyFamily::ProposedSqrt) >= sq);
		REQUIRE(proposed(u, more, PenaltyFamily::ProposedSquared) >= sqd);
	}
}

TEST_CASE("limiting cases reproduce l1 and l2")
{
	Rng r(5);
	for (int trial = 0; trial < 100; trial++) {
		const std::size_t n = 1 + r.below(64);
		const auto w = random_vector(r, n);
		std::vector<ProjectionMask> basis;
		for (std::size_t j = 0; j < n; j++) {
			const std::size_t idx[] = {j};
			basis.push_back(ProjectionMask::from_indices(n, idx));
		}
		const double l1 = penalty_l1(w, 1).value;
		REQUIRE(std::fabs(proposed(w, basis, PenaltyFamily::ProposedSqrt) - l1) / l1 < 1e-12);
		const std::vector<ProjectionMask> full{ProjectionMask::full(n)};
		const double l2 = penalty_l2(w, 1).value;
		REQUIRE(std::fabs(proposed(w, full, PenaltyFamily::ProposedSqrt) - l2) / l2 < 1e-12);
	}
}

TEST_CASE("normalized penalty is roughly invariant to the experiment count")
{
	Rng r(4);
	const auto w = random_vector(r, 500);
	SamplerConfig cfg;
	cfg.selection_mode = SelectionMode::UniformThreshold;
	cfg.threshold = 0.5;
	PenaltySpec spec;
	spec.family = PenaltyFamily::ProposedSqrt;
	spec.lambda = 1.0;
	double means[2] = {0, 0};
	double max_counts[2] = {0, 0};
	const int seeds = 10;
	for (int k = 0; k < 2; k++) {
		cfg.experiments = k == 0 ? 200 : 400;
		for (int seed = 0; seed < seeds; seed++) {
			const auto draw = draw_masks(w, cfg, SamplerState{}, Rng(seed, k));
			means[k] += penalty_proposed(w, draw.masks, draw.counter, spec).value / seeds;
			max_counts[k] += static_cast<double>(draw.counter.max()) / seeds;
		}
	}
	CHECK(max_counts[1] / max_counts[0] == doctest::Approx(2.0).epsilon(0.15));
	CHECK(std::fabs(means[1] / means[0] - 1.0) < 0.10);
}

TEST_CASE("evaluate_penalty dispatches on the family")
{
	const Vector w{3, -4};
	const auto masks = masks_of({{1, 1}});
	const auto counter = IndexCounter::of(masks);
	CHECK(evaluate_penalty(w, masks, counter, plain(PenaltyFamily::L1)).value == 7.0);
	CHECK(evaluate_penalty(w, masks, counter, plain(PenaltyFamily::L2)).value == 5.0);
	CHECK(evaluate_penalty(w, masks, counter, plain(PenaltyFamily::ProposedSqrt)).value == 5.0);
	CHECK(evaluate_penalty(w, masks, counter, plain(PenaltyFamily::ProposedSquared)).value == doctest::Approx(25.0));
}
