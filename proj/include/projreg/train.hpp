#ifndef PROJREG_TRAIN_HPP
#define PROJREG_TRAIN_HPP

#include <projreg/data.hpp>
#include <projreg/losses.hpp>
#include <projreg/model.hpp>
#include <projreg/penalty.hpp>
#include <projreg/sampler.hpp>

#include <functional>
#include <string>
#include <vector>

namespace projreg {

enum class LossKind { MSE, CrossEntropy, ProjectedCE };
enum class RegKind { None, L1, L2, Proposed };
enum class OptimizerKind { SGD, AdaptiveMoment };

std::string to_string(LossKind kind);
std::string to_string(RegKind kind);
std::string to_string(OptimizerKind kind);
LossKind parse_loss_kind(const std::string &text);
RegKind parse_reg_kind(const std::string &text);
OptimizerKind parse_optimizer_kind(const std::string &text);

/// Per-slot SGD or Adam (moment decay 0.9 / 0.999, epsilon 1e-8).
class Optimizer {
public:
	Optimizer(OptimizerKind kind, double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);

	/// Advances the shared step counter used for bias correction; call once per optimizer step.
	void begin_step();
	/// Updates one parameter tensor. `slot` identifies its moment buffers.
	void update(std::size_t slot, std::span<double> params, std::span<const double> grads);

private:
	OptimizerKind m_kind;
	double m_lr;
	double m_beta1;
	double m_beta2;
	double m_epsilon;
	long m_step = 0;
	std::vector<Vector> m_first;
	std::vector<Vector> m_second;
};

struct TrainConfig {
	LossKind loss = LossKind::CrossEntropy;
	RegKind reg = RegKind::None;
	SamplerConfig sampler;
	/// lambda and the proposed family (sqrt or squared); the family is ignored for L1/L2.
	PenaltySpec penalty;
	double learning_rate = 0.001;
	std::size_t batch_size = 32;
	int epochs = 20;
	OptimizerKind optimizer = OptimizerKind::AdaptiveMoment;
	std::uint64_t seed = 0;
	double metric_threshold = 1e-3;

	void validate() const;
};

struct MetricsRow {
	int iteration = 0; ///< epoch number, starting at 1
	std::string split;
	double loss = 0.0;
	double accuracy = 0.0;
	double weight_magnitude = 0.0; ///< sum |w| over all weight matrices
	double weight_l2 = 0.0;
	double weight_density = 0.0;   ///< 1 - sparsity

	bool operator==(const MetricsRow &) const = default;
};

/// 1 - #{j : |w_j| > threshold} / N.
double metric_sparsity(std::span<const double> w, double threshold);

/// Every weight (not bias) of the model, layer by layer.
Vector flatten_weights(const Model &model);

/**
 * Loss, accuracy and weight statistics of `model` on `data`.
 *
 * The loss is plain cross-entropy for classification and MSE for
 * regression. Regression "accuracy" is the coefficient of determination
 * clipped to [0, 1].
 */
MetricsRow evaluate(const Model &model, const Dataset &data, double metric_threshold);

struct StepInfo {
	long step = 0;
	double data_loss = 0.0;
	double penalty = 0.0;
	/// Per-sample projected-CE results of this step (empty unless loss == ProjectedCE).
	const std::vector<ProjectedLoss> *projected = nullptr;
	/// Per-sample output-layer gradient (batch x classes).
	const Matrix *output_grad = nullptr;
};

/// Raised when the training loss or a parameter becomes non-finite.
class DivergenceError : public Error {
public:
	DivergenceError(long step, const std::string &what);
	long step() const noexcept { return m_step; }

private:
	long m_step;
};

/**
 * Mini-batch training.
 *
 * Each step: forward, data-loss gradient, per-layer penalty gradient (fresh
 * masks for every weight matrix, masks frozen), optimizer update, then one
 * sampler-state commit per layer. Biases are not regularized. After every
 * epoch a train row and a test row are appended to the result.
 */
std::vector<MetricsRow> train(Model &model, const Dataset &train_data, const Dataset &test_data, const TrainConfig &cfg,
		const std::function<void(const StepInfo &)> &on_step = {});

} // namespace projreg

#endif // PROJREG_TRAIN_HPP
