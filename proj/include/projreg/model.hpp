#ifndef PROJREG_MODEL_HPP
#define PROJREG_MODEL_HPP

#include <projreg/numerics.hpp>

#include <string>
#include <vector>

namespace projreg {

enum class Activation {
	Identity,
	ReLU,
	SoftmaxOutput ///< identity in the forward pass; the loss applies the softmax
};

/// Fully connected layer computing act(x W^T + b), weights stored out x in.
struct Layer {
	Matrix weights;
	Vector bias;
	Activation activation = Activation::Identity;

	std::size_t inputs() const noexcept { return weights.cols(); }
	std::size_t outputs() const noexcept { return weights.rows(); }
};

class Model {
public:
	std::vector<Layer> layers;

	/**
	 * Dense network with layer widths `sizes` (input first). Hidden layers use
	 * ReLU with He-normal weights; the output layer uses `output` with
	 * weights drawn from N(0, 1/fan_in). Biases start at zero.
	 */
	static Model dense(const std::vector<std::size_t> &sizes, Activation output, Rng &rng);

	std::size_t input_dim() const;
	std::size_t output_dim() const;
	std::size_t weight_count() const noexcept;
	/// Throws Error if consecutive layer dimensions disagree.
	void validate() const;
};

/// activations[0] is the input; activations[l + 1] is the output of layer l.
struct ForwardPass {
	std::vector<Matrix> activations;

	const Matrix &output() const { return activations.back(); }
};

ForwardPass forward(const Model &model, const Matrix &x);

struct Gradients {
	std::vector<Matrix> weights;
	std::vector<Vector> bias;
};

/// Backpropagates d(loss)/d(output) through the cached forward pass.
Gradients backward(const Model &model, const ForwardPass &pass, const Matrix &output_grad);

} // namespace projreg

#endif // PROJREG_MODEL_HPP
