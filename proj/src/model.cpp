#include <projreg/model.hpp>

#include <algorithm>
#include <cmath>

namespace projreg {

Model Model::dense(const std::vector<std::size_t> &sizes, Activation output, Rng &rng)
{
	if (sizes.size() < 2)
		throw Error("Model::dense: need at least input and output sizes");
	Model model;
	for (std::size_t l = 0; l + 1 < sizes.size(); l++) {
		const bool last = l + 2 == sizes.size();
		Layer layer;
		layer.activation = last ? output : Activation::ReLU;
		layer.weights = Matrix(sizes[l + 1], sizes[l]);
		layer.bias.assign(sizes[l + 1], 0.0);
		const double fan_in = static_cast<double>(sizes[l]);
		const double stddev = last ? std::sqrt(1.0 / fan_in) : std::sqrt(2.0 / fan_in);
		for (auto &w : layer.weights.flat())
			w = stddev * rng.normal();
		model.layers.push_back(std::move(layer));
	}
	return model;
}

std::size_t Model::input_dim() const
{
	if (layers.empty())
		throw Error("Model: no layers");
	return layers.front().inputs();
}

std::size_t Model::output_dim() const
{
	if (layers.empty())
		throw Error("Model: no layers");
	return layers.back().outputs();
}

std::size_t Model::weight_count() const noexcept
{
	std::size_t total = 0;
	for (const auto &layer : layers)
		total += layer.weights.size();
	return total;
}

void Model::validate() const
{
	if (layers.empty())
		throw Error("Model: no layers");
	for (std::size_t l = 0; l < layers.size(); l++) {
		if (layers[l].bias.size() != layers[l].outputs())
			throw Error("Model: layer " + std::to_string(l) + " bias length does not match its outputs");
		if (l > 0 && layers[l].inputs() != layers[l - 1].outputs())
			throw Error("Model: layer " + std::to_string(l) + " expects " + std::to_string(layers[l].inputs())
					+ " inputs but layer " + std::to_string(l - 1) + " produces " + std::to_string(layers[l - 1].outputs()));
	}
}

ForwardPass forward(const Model &model, const Matrix &x)
{
	model.validate();
	if (x.cols() != model.input_dim())
		throw Error("forward: input has " + std::to_string(x.cols()) + " columns, model expects "
				+ std::to_string(model.input_dim()));
	ForwardPass pass;
	pass.activations.reserve(model.layers.size() + 1);
	pass.activations.push_back(x);
	for (const auto &layer : model.layers) {
		const Matrix &in = pass.activations.back();
		Matrix out(in.rows(), layer.outputs());
		for (std::size_t i = 0; i < in.rows(); i++) {
			const auto a = in.row(i);
			for (std::size_t o = 0; o < layer.outputs(); o++) {
				double z = layer.bias[o];
				const auto w = layer.weights.row(o);
				for (std::size_t k = 0; k < a.size(); k++)
					z += w[k] * a[k];
				out(i, o) = (layer.activation == Activation::ReLU) ? std::max(0.0, z) : z;
			}
		}
		pass.activations.push_back(std::move(out));
	}
	return pass;
}

Gradients backward(const Model &model, const ForwardPass &pass, const Matrix &output_grad)
{
	const std::size_t depth = model.layers.size();
	if (pass.activations.size() != depth + 1)
		throw Error("backward: forward pass does not belong to this model");
	if (output_grad.rows() != pass.output().rows() || output_grad.cols() != pass.output().cols())
		throw Error("backward: output gradient shape does not match the model output");

	Gradients grads;
	grads.weights.resize(depth);
	grads.bias.resize(depth);
	Matrix upstream = output_grad;
	for (std::size_t l = depth; l-- > 0;) {
		const Layer &layer = model.layers[l];
		const Matrix &in = pass.activations[l];
		const Matrix &out = pass.activations[l + 1];
		if (layer.activation == Activation::ReLU)
			for (std::size_t i = 0; i < out.rows(); i++)
				for (std::size_t o = 0; o < out.cols(); o++)
					if (!(out(i, o) > 0.0))
						upstream(i, o) = 0.0;

		Matrix dw(layer.outputs(), layer.inputs());
		Vector db(layer.outputs(), 0.0);
		for (std::size_t i = 0; i < in.rows(); i++) {
			const auto a = in.row(i);
			for (std::size_t o = 0; o < layer.outputs(); o++) {
				const double g = upstream(i, o);
				db[o] += g;
				if (g == 0.0)
					continue;
				auto row = dw.row(o);
				for (std::size_t k = 0; k < a.size(); k++)
					row[k] += g * a[k];
			}
		}
		if (l > 0) {
			Matrix downstream(in.rows(), layer.inputs());
			for (std::size_t i = 0; i < in.rows(); i++)
				for (std::size_t o = 0; o < layer.outputs(); o++) {
					const double g = upstream(i, o);
					if (g == 0.0)
						continue;
					const auto w = layer.weights.row(o);
					auto d = downstream.row(i);
					for (std::size_t k = 0; k < w.size(); k++)
						d[k] += g * w[k];
				}
			upstream = std::move(downstream);
		}
		grads.weights[l] = std::move(dw);
		grads.bias[l] = std::move(db);
	}
	return grads;
}

} // namespace projreg
