#include <projreg/train.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace projreg {

namespace {
	// stream ids under Rng(cfg.seed)
	constexpr std::uint64_t shuffle_stream = 2;
	constexpr std::uint64_t mask_stream = 3;
	constexpr std::uint64_t output_stream = 4;

	std::size_t argmax(std::span<const double> v)
	{
		return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
	}

	void check_compatible(const Model &model, const Dataset &data, LossKind loss)
	{
		data.validate();
		if (data.dims() != model.input_dim())
			throw Error("train: dataset has " + std::to_string(data.dims()) + " features, model expects "
					+ std::to_string(model.input_dim()));
		if (loss == LossKind::MSE) {
			if (data.is_classification() || model.output_dim() != 1)
				throw Error("train: MSE needs a regression dataset and a single model output");
		} else if (!data.is_classification() || model.output_dim() != data.n_classes)
			throw Error("train: cross-entropy losses need a classification dataset with one output per class");
	}

	PenaltySpec layer_penalty(const TrainConfig &cfg)
	{
		PenaltySpec spec = cfg.penalty;
		if (cfg.reg == RegKind::L1)
			spec.family = PenaltyFamily::L1;
		else if (cfg.reg == RegKind::L2)
			spec.family = PenaltyFamily::L2;
		else if (spec.family != PenaltyFamily::ProposedSqrt)
			spec.family = PenaltyFamily::ProposedSquared;
		return spec;
	}
}

std::string to_string(LossKind kind)
{
	switch (kind) {
		case LossKind::MSE:
			return "mse";
		case LossKind::CrossEntropy:
			return "ce";
		case LossKind::ProjectedCE:
			return "projected-ce";
	}
	return "?";
}

std::string to_string(RegKind kind)
{
	switch (kind) {
		case RegKind::None:
			return "none";
		case RegKind::L1:
			return "l1";
		case RegKind::L2:
			return "l2";
		case RegKind::Proposed:
			return "proposed";
	}
	return "?";
}

std::string to_string(OptimizerKind kind)
{
	return kind == OptimizerKind::SGD ? "sgd" : "adam";
}

LossKind parse_loss_kind(const std::string &text)
{
	if (text == "mse")
		return LossKind::MSE;
	if (text == "ce")
		return LossKind::CrossEntropy;
	if (text == "projected-ce")
		return LossKind::ProjectedCE;
	throw Error("unknown loss '" + text + "' (expected mse|ce|projected-ce)");
}

RegKind parse_reg_kind(const std::string &text)
{
	if (text == "none")
		return RegKind::None;
	if (text == "l1")
		return RegKind::L1;
	if (text == "l2")
		return RegKind::L2;
	if (text == "proposed")
		return RegKind::Proposed;
	throw Error("unknown regularizer '" + text + "' (expected none|l1|l2|proposed)");
}

OptimizerKind parse_optimizer_kind(const std::string &text)
{
	if (text == "sgd")
		return OptimizerKind::SGD;
	if (text == "adam")
		return OptimizerKind::AdaptiveMoment;
	throw Error("unknown optimizer '" + text + "' (expected sgd|adam)");
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, double beta1, double beta2, double epsilon) :
		m_kind(kind),
		m_lr(learning_rate),
		m_beta1(beta1),
		m_beta2(beta2),
		m_epsilon(epsilon)
{
}

void Optimizer::begin_step()
{
	m_step++;
}

void Optimizer::update(std::size_t slot, std::span<double> params, std::span<const double> grads)
{
	if (params.size() != grads.size())
		throw Error("Optimizer::update: parameter and gradient lengths differ");
	if (m_kind == OptimizerKind::SGD) {
		for (std::size_t i = 0; i < params.size(); i++)
			params[i] -= m_lr * grads[i];
		return;
	}
	if (m_step == 0)
		throw Error("Optimizer::update called before begin_step");
	if (slot >= m_first.size()) {
		m_first.resize(slot + 1);
		m_second.resize(slot + 1);
	}
	auto &m = m_first[slot];
	auto &v = m_second[slot];
	if (m.empty()) {
		m.assign(params.size(), 0.0);
		v.assign(params.size(), 0.0);
	}
	const double c1 = 1.0 - std::pow(m_beta1, static_cast<double>(m_step));
	const double c2 = 1.0 - std::pow(m_beta2, static_cast<double>(m_step));
	for (std::size_t i = 0; i < params.size(); i++) {
		m[i] = m_beta1 * m[i] + (1.0 - m_beta1) * grads[i];
		v[i] = m_beta2 * v[i] + (1.0 - m_beta2) * grads[i] * grads[i];
		params[i] -= m_lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + m_epsilon);
	}
}

void TrainConfig::validate() const
{
	if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
		throw Error("TrainConfig: learning rate must be finite and positive");
	if (batch_size < 1)
		throw Error("TrainConfig: batch size must be at least 1");
	if (epochs < 0)
		throw Error("TrainConfig: epochs must be non-negative");
	if (penalty.lambda < 0.0)
		throw Error("TrainConfig: lambda must be non-negative");
	if (reg == RegKind::Proposed || loss == LossKind::ProjectedCE)
		sampler.validate();
}

double metric_sparsity(std::span<const double> w, double threshold)
{
	if (w.empty())
		return 1.0;
	std::size_t above = 0;
	for (double v : w)
		if (std::fabs(v) > threshold)
			above++;
	return 1.0 - static_cast<double>(above) / static_cast<double>(w.size());
}

Vector flatten_weights(const Model &model)
{
	Vector out;
	out.reserve(model.weight_count());
	for (const auto &layer : model.layers)
		out.insert(out.end(), layer.weights.flat().begin(), layer.weights.flat().end());
	return out;
}

MetricsRow evaluate(const Model &model, const Dataset &data, double metric_threshold)
{
	MetricsRow row;
	row.split = data.split;
	const Vector weights = flatten_weights(model);
	row.weight_magnitude = l1_norm(weights);
	row.weight_l2 = l2_norm(weights);
	row.weight_density = 1.0 - metric_sparsity(weights, metric_threshold);
	if (data.size() == 0)
		return row;

	const ForwardPass pass = forward(model, data.features);
	const Matrix &out = pass.output();
	const double n = static_cast<double>(data.size());
	if (data.is_classification()) {
		std::size_t correct = 0;
		for (std::size_t i = 0; i < data.size(); i++) {
			row.loss += loss_ce(out.row(i), data.labels[i]).value;
			if (argmax(out.row(i)) == data.labels[i])
				correct++;
		}
		row.loss /= n;
		row.accuracy = static_cast<double>(correct) / n;
	} else {
		const double mean = std::accumulate(data.targets.begin(), data.targets.end(), 0.0) / n;
		double residual = 0.0;
		double spread = 0.0;
		for (std::size_t i = 0; i < data.size(); i++) {
			const double diff = out(i, 0) - data.targets[i];
			residual += diff * diff;
			spread += (data.targets[i] - mean) * (data.targets[i] - mean);
		}
		row.loss = residual / n;
		row.accuracy = spread > 0.0 ? std::clamp(1.0 - residual / spread, 0.0, 1.0) : 0.0;
	}
	return row;
}

DivergenceError::DivergenceError(long step, const std::string &what) :
		Error("training diverged at step " + std::to_string(step) + ": " + what),
		m_step(step)
{
}

std::vector<MetricsRow> train(Model &model, const Dataset &train_data, const Dataset &test_data, const TrainConfig &cfg,
		const std::function<void(const StepInfo &)> &on_step)
{
	cfg.validate();
	model.validate();
	check_compatible(model, train_data, cfg.loss);
	check_compatible(model, test_data, cfg.loss);
	if (train_data.size() == 0)
		throw Error("train: empty training set");

	const Rng root(cfg.seed);
	const std::size_t depth = model.layers.size();
	const PenaltySpec penalty = layer_penalty(cfg);
	Optimizer optimizer(cfg.optimizer, cfg.learning_rate);
	std::vector<SamplerState> weight_states(depth);
	SamplerState output_state;

	std::vector<MetricsRow> rows;
	std::vector<std::size_t> order(train_data.size());
	std::iota(order.begin(), order.end(), std::size_t{0});
	long step = 0;
	for (int epoch = 1; epoch <= cfg.epochs; epoch++) {
		Rng shuffler = root.substream(shuffle_stream).substream(static_cast<std::uint64_t>(epoch));
		shuffle(order, shuffler);
		for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
			step++;
			const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
			const std::span<const std::size_t> rows_in_batch(order.data() + start, stop - start);
			const Dataset batch = train_data.subset(rows_in_batch, "batch");
			const double batch_n = static_cast<double>(batch.size());

			const ForwardPass pass = forward(model, batch.features);
			const Matrix &out = pass.output();
			Matrix output_grad(out.rows(), out.cols());
			double data_loss = 0.0;
			std::vector<ProjectedLoss> projected;
			if (cfg.loss == LossKind::MSE) {
				Vector pred(out.rows());
				for (std::size_t i = 0; i < out.rows(); i++)
					pred[i] = out(i, 0);
				const LossValue l = loss_mse(pred, batch.targets);
				data_loss = l.value;
				for (std::size_t i = 0; i < out.rows(); i++)
					output_grad(i, 0) = l.gradient[i];
			} else if (cfg.loss == LossKind::CrossEntropy) {
				for (std::size_t i = 0; i < out.rows(); i++) {
					const LossValue l = loss_ce(out.row(i), batch.labels[i]);
					data_loss += l.value / batch_n;
					for (std::size_t k = 0; k < out.cols(); k++)
						output_grad(i, k) = l.gradient[k] / batch_n;
				}
			} else {
				const Rng step_rng = root.substream(output_stream).substream(static_cast<std::uint64_t>(step));
				projected.reserve(out.rows());
				for (std::size_t i = 0; i < out.rows(); i++) {
					Rng sample_rng = step_rng.substream(i);
					projected.push_back(loss_projected_ce(out.row(i), batch.labels[i], cfg.sampler, output_state, sample_rng));
					data_loss += projected.back().value / batch_n;
					for (std::size_t k = 0; k < out.cols(); k++)
						output_grad(i, k) = projected.back().gradient[k] / batch_n;
				}
			}
			if (!std::isfinite(data_loss))
				throw DivergenceError(step, "non-finite data loss");

			Gradients grads = backward(model, pass, output_grad);

			double penalty_value = 0.0;
			std::vector<Vector> committed(depth);
			if (cfg.reg != RegKind::None) {
				const Rng step_rng = root.substream(mask_stream).substream(static_cast<std::uint64_t>(step));
				for (std::size_t l = 0; l < depth; l++) {
					const auto w = model.layers[l].weights.flat();
					PenaltyResult result;
					if (cfg.reg == RegKind::Proposed) {
						MaskDraw draw = draw_masks(w, cfg.sampler, weight_states[l], step_rng.substream(l));
						result = penalty_proposed(w, draw.masks, draw.counter, penalty);
						committed[l] = std::move(draw.distribution);
					} else
						result = evaluate_penalty(w, {}, IndexCounter(w.size()), penalty);
					penalty_value += result.value;
					auto g = grads.weights[l].flat();
					for (std::size_t j = 0; j < g.size(); j++)
						g[j] += result.gradient[j];
				}
			}

			optimizer.begin_step();
			for (std::size_t l = 0; l < depth; l++) {
				optimizer.update(2 * l, model.layers[l].weights.flat(), grads.weights[l].flat());
				optimizer.update(2 * l + 1, model.layers[l].bias, grads.bias[l]);
				if (!all_finite(model.layers[l].weights.flat()) || !all_finite(model.layers[l].bias))
					throw DivergenceError(step, "non-finite parameters in layer " + std::to_string(l));
			}

			// one commit per optimizer step
			if (cfg.reg == RegKind::Proposed)
				for (std::size_t l = 0; l < depth; l++)
					weight_states[l].commit(committed[l]);
			if (cfg.loss == LossKind::ProjectedCE) {
				Vector mean(out.cols(), 0.0);
				for (const auto &p : projected)
					for (std::size_t k = 0; k < mean.size(); k++)
						mean[k] += p.distribution[k] / batch_n;
				output_state.commit(mean);
			}

			if (on_step) {
				StepInfo info;
				info.step = step;
				info.data_loss = data_loss;
				info.penalty = penalty_value;
				info.projected = cfg.loss == LossKind::ProjectedCE ? &projected : nullptr;
				info.output_grad = &output_grad;
				on_step(info);
			}
		}

		MetricsRow train_row = evaluate(model, train_data, cfg.metric_threshold);
		MetricsRow test_row = evaluate(model, test_data, cfg.metric_threshold);
		train_row.iteration = test_row.iteration = epoch;
		train_row.split = "train";
		test_row.split = "test";
		rows.push_back(train_row);
		rows.push_back(test_row);
	}
	return rows;
}

} // namespace projreg
