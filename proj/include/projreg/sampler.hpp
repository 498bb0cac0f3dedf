#ifndef PROJREG_SAMPLER_HPP
#define PROJREG_SAMPLER_HPP

#include <projreg/numerics.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace projreg {

/// How a weight vector is turned into sampling scores before the softmax.
enum class ScoreMode {
	MagnitudeIncreasing, ///< softmax(+p_s * |w_j|): large weights are likelier
	PaperLiteral         ///< softmax(-p_s * w_j), the exponent exactly as originally written
};

/// How one projection mask is selected from the momentum-adjusted distribution.
enum class SelectionMode {
	TopK,                 ///< the ceil(s_p*N) most probable coordinates, ties to the lowest index
	ProbabilityThreshold, ///< coordinates with probability > T/N
	UniformThreshold,     ///< coordinate j kept iff an independent u_j ~ U(0,1) exceeds T; ignores w
	WeightedDraw          ///< ceil(s_p*N) coordinates drawn without replacement, proportional to probability
};

std::string to_string(ScoreMode mode);
std::string to_string(SelectionMode mode);
ScoreMode parse_score_mode(const std::string &text);
SelectionMode parse_selection_mode(const std::string &text);

struct SamplerConfig {
	double density = 0.01;  ///< s_p, fraction of coordinates kept per mask
	int experiments = 1;    ///< S
	double threshold = 0.0; ///< T
	double alpha = 0.9;     ///< momentum coefficient
	bool momentum = true;   ///< when false the raw score distribution is used
	ScoreMode score_mode = ScoreMode::MagnitudeIncreasing;
	SelectionMode selection_mode = SelectionMode::TopK;

	/// Throws Error on out-of-range fields.
	void validate() const;
	/// Mask size used by the fixed-size modes: ceil(s_p * n).
	std::size_t mask_size(std::size_t n) const;
};

/// Distribution retained from the previous optimizer step.
class SamplerState {
public:
	SamplerState() = default;

	bool initialized() const noexcept { return m_initialized; }
	/// The committed distribution, or uniform 1/n when nothing was committed yet.
	Vector previous(std::size_t n) const;
	/// Replaces the retained distribution. Throws Error if `distribution` is not a probability vector.
	void commit(std::span<const double> distribution);

private:
	Vector m_previous;
	bool m_initialized = false;
};

struct ProjectionMask {
	std::vector<std::uint8_t> indicators;
	std::size_t selected_count = 0;

	std::size_t size() const noexcept { return indicators.size(); }
	bool selected(std::size_t j) const { return indicators[j] != 0; }

	static ProjectionMask from_indices(std::size_t n, std::span<const std::size_t> indices);
	static ProjectionMask full(std::size_t n);
};

/// Per-coordinate selection tally over the masks of one penalty evaluation.
struct IndexCounter {
	std::vector<std::uint32_t> counts;

	explicit IndexCounter(std::size_t n = 0) : counts(n, 0) {}
	void add(const ProjectionMask &mask);
	std::uint32_t max() const noexcept;
	std::uint64_t total() const noexcept;

	static IndexCounter of(std::span<const ProjectionMask> masks);
};

struct MaskDraw {
	std::vector<ProjectionMask> masks;
	IndexCounter counter;
	/// Mean of the per-experiment (momentum-adjusted) distributions; what a step commits.
	Vector distribution;
};

Vector score_distribution(std::span<const double> w, double p_s, ScoreMode mode);

/// alpha*current + (1-alpha)*previous. Does not modify `state`.
Vector apply_momentum(std::span<const double> current, const SamplerState &state, double alpha);

/// Selects one mask from a probability vector. `rng` supplies the draws used
/// by UniformThreshold and WeightedDraw.
ProjectionMask select_mask(std::span<const double> probabilities, const SamplerConfig &cfg, Rng &rng);

/// One experiment: draw p_s from `stream`, score, apply momentum, select.
/// If `distribution` is non-null it receives the distribution the mask was selected from.
ProjectionMask draw_experiment(std::span<const double> w, const SamplerConfig &cfg, const SamplerState &state,
		Rng &stream, Vector *distribution = nullptr);

/**
 * Draws cfg.experiments projection masks for `w`.
 *
 * Experiment s uses rng.substream(s): it draws its own p_s ~ U(0,1), forms the
 * score distribution, applies momentum against `state`, then selects. The
 * result is therefore independent of the order experiments are evaluated in.
 */
MaskDraw draw_masks(std::span<const double> w, const SamplerConfig &cfg, const SamplerState &state, const Rng &rng);

} // namespace projreg

#endif // PROJREG_SAMPLER_HPP
