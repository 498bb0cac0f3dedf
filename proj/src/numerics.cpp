#include <projreg/numerics.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace projreg {

namespace {
	constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;

	std::uint64_t mix64(std::uint64_t z) noexcept
	{
		z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
		z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
		return z ^ (z >> 31);
	}

	std::uint64_t splitmix_next(std::uint64_t &state) noexcept
	{
		state += golden_gamma;
		return mix64(state);
	}

	std::uint64_t derive_key(std::uint64_t parent, std::uint64_t id) noexcept
	{
		return mix64(parent ^ mix64(id + golden_gamma));
	}

	std::uint64_t rotl(std::uint64_t x, int k) noexcept
	{
		return (x << k) | (x >> (64 - k));
	}
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) :
		Rng(FromKey{}, derive_key(mix64(seed), stream))
{
}

Rng::Rng(FromKey, std::uint64_t key) :
		m_key(key)
{
	std::uint64_t sm = key;
	for (auto &word : m_state)
		word = splitmix_next(sm);
}

std::uint64_t Rng::next_u64()
{
	const std::uint64_t result = rotl(m_state[1] * 5, 7) * 9;
	const std::uint64_t t = m_state[1] << 17;
	m_state[2] ^= m_state[0];
	m_state[3] ^= m_state[1];
	m_state[1] ^= m_state[2];
	m_state[0] ^= m_state[3];
	m_state[2] ^= t;
	m_state[3] = rotl(m_state[3], 45);
	return result;
}

double Rng::uniform()
{
	return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal()
{
	// 1 - u lies in (0, 1], so the log is finite
	const double u1 = 1.0 - uniform();
	const double u2 = uniform();
	return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t bound)
{
	if (bound == 0)
		throw Error("Rng::below: bound must be positive");
	// Lemire's multiply-shift with rejection
	const std::uint64_t threshold = (0 - bound) % bound;
	while (true) {
		const unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
		if (static_cast<std::uint64_t>(m) >= threshold)
			return static_cast<std::uint64_t>(m >> 64);
	}
}

Rng Rng::substream(std::uint64_t id) const
{
	return Rng(FromKey{}, derive_key(m_key, id));
}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill) :
		m_rows(rows),
		m_cols(cols),
		m_values(rows * cols, fill)
{
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values) :
		m_rows(rows),
		m_cols(cols),
		m_values(std::move(values))
{
	if (m_values.size() != rows * cols)
		throw Error("Matrix: storage length " + std::to_string(m_values.size()) + " does not match "
				+ std::to_string(rows) + "x" + std::to_string(cols));
}

Vector stable_softmax(std::span<const double> scores)
{
	if (scores.empty())
		throw Error("empty vector");
	const double top = *std::max_element(scores.begin(), scores.end());
	Vector out(scores.size());
	double total = 0.0;
	for (std::size_t i = 0; i < scores.size(); i++) {
		out[i] = std::exp(scores[i] - top);
		total += out[i];
	}
	for (auto &v : out)
		v /= total;
	return out;
}

bool all_finite(std::span<const double> values) noexcept
{
	return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void require_finite(std::span<const double> values, const std::string &what)
{
	for (std::size_t i = 0; i < values.size(); i++)
		if (!std::isfinite(values[i]))
			throw Error(what + ": non-finite entry at index " + std::to_string(i));
}

double l1_norm(std::span<const double> values) noexcept
{
	double sum = 0.0;
	for (double v : values)
		sum += std::fabs(v);
	return sum;
}

double l2_norm(std::span<const double> values) noexcept
{
	double sum = 0.0;
	for (double v : values)
		sum += v * v;
	return std::sqrt(sum);
}

double dot(std::span<const double> a, std::span<const double> b)
{
	if (a.size() != b.size())
		throw Error("dot: length mismatch");
	double sum = 0.0;
	for (std::size_t i = 0; i < a.size(); i++)
		sum += a[i] * b[i];
	return sum;
}

} // namespace projreg
