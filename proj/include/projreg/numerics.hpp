#ifndef PROJREG_NUMERICS_HPP
#define PROJREG_NUMERICS_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace projreg {

/// Thrown when an operation receives arguments that violate its contract.
class Error : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// Flat parameter vector; every penalty and sampler acts on one of these.
using Vector = std::vector<double>;

/**
 * Splittable deterministic generator.
 *
 * The engine is xoshiro256** seeded through SplitMix64. A generator is
 * identified by a 64-bit key derived from (seed, stream path); substream(id)
 * derives a child key without touching the parent's state, so the draws an
 * experiment sees depend only on its position in the stream tree and never
 * on scheduling order.
 */
class Rng {
public:
	explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

	std::uint64_t next_u64();
	/// Uniform real in [0, 1) with 53 random bits.
	double uniform();
	/// Standard normal via Box-Muller (one value per two uniforms, no caching).
	double normal();
	/// Uniform integer in [0, bound). bound must be > 0.
	std::uint64_t below(std::uint64_t bound);

	Rng substream(std::uint64_t id) const;

	std::uint64_t key() const { return m_key; }

private:
	struct FromKey {};
	Rng(FromKey, std::uint64_t key);

	std::uint64_t m_key;
	std::uint64_t m_state[4];
};

/// In-place Fisher-Yates shuffle driven by Rng::below.
template<typename T>
void shuffle(std::vector<T> &items, Rng &rng)
{
	for (std::size_t i = items.size(); i > 1; --i) {
		const auto j = static_cast<std::size_t>(rng.below(i));
		std::swap(items[i - 1], items[j]);
	}
}

/// Row-major dense matrix.
class Matrix {
public:
	Matrix() = default;
	Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
	Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

	std::size_t rows() const noexcept { return m_rows; }
	std::size_t cols() const noexcept { return m_cols; }
	std::size_t size() const noexcept { return m_values.size(); }

	double &operator()(std::size_t r, std::size_t c) { return m_values[r * m_cols + c]; }
	double operator()(std::size_t r, std::size_t c) const { return m_values[r * m_cols + c]; }

	std::span<double> row(std::size_t r) { return {m_values.data() + r * m_cols, m_cols}; }
	std::span<const double> row(std::size_t r) const { return {m_values.data() + r * m_cols, m_cols}; }

	std::span<double> flat() noexcept { return m_values; }
	std::span<const double> flat() const noexcept { return m_values; }

	bool operator==(const Matrix &) const = default;

private:
	std::size_t m_rows = 0;
	std::size_t m_cols = 0;
	std::vector<double> m_values;
};

/// Softmax with unconditional max subtraction. Throws Error("empty vector").
Vector stable_softmax(std::span<const double> scores);

bool all_finite(std::span<const double> values) noexcept;
/// Throws Error naming `what` if any entry is NaN or infinite.
void require_finite(std::span<const double> values, const std::string &what);

double l1_norm(std::span<const double> values) noexcept;
double l2_norm(std::span<const double> values) noexcept;
double dot(std::span<const double> a, std::span<const double> b);

} // namespace projreg

#endif // PROJREG_NUMERICS_HPP
