#include <projreg/data.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace projreg {

namespace {
	constexpr std::uint32_t idx_images_magic = 0x00000803;
	constexpr std::uint32_t idx_labels_magic = 0x00000801;
	constexpr std::uint64_t split_stream = 0x5317;

	std::string hex(std::uint32_t v)
	{
		std::ostringstream ss;
		ss << "0x" << std::hex << std::setw(8) << std::setfill('0') << v;
		return ss.str();
	}

	std::vector<std::uint8_t> read_bytes(const std::filesystem::path &path)
	{
		std::ifstream in(path, std::ios::binary);
		if (!in)
			throw Error("cannot open '" + path.string() + "'");
		return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
	}

	void write_bytes(const std::filesystem::path &path, const std::vector<std::uint8_t> &bytes)
	{
		std::ofstream out(path, std::ios::binary);
		if (!out)
			throw Error("cannot write '" + path.string() + "'");
		out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
	}

	std::uint32_t read_be32(const std::vector<std::uint8_t> &bytes, std::size_t offset, const std::filesystem::path &path)
	{
		if (offset + 4 > bytes.size())
			throw Error("'" + path.string() + "': truncated header at byte offset " + std::to_string(offset));
		return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16)
				| (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
	}

	void append_be32(std::vector<std::uint8_t> &bytes, std::uint32_t v)
	{
		bytes.push_back(static_cast<std::uint8_t>(v >> 24));
		bytes.push_back(static_cast<std::uint8_t>(v >> 16));
		bytes.push_back(static_cast<std::uint8_t>(v >> 8));
		bytes.push_back(static_cast<std::uint8_t>(v));
	}

	void check_magic(std::uint32_t found, std::uint32_t expected, const std::filesystem::path &path)
	{
		if (found != expected)
			throw Error("'" + path.string() + "': bad magic number at byte offset 0: expected " + hex(expected)
					+ ", found " + hex(found));
	}

	void check_payload(std::size_t available, std::size_t needed, std::size_t header, const std::filesystem::path &path)
	{
		if (available < needed)
			throw Error("'" + path.string() + "': truncated payload, data ends at byte offset "
					+ std::to_string(header + available) + " but " + std::to_string(header + needed) + " bytes are required");
	}

	std::vector<std::size_t> sparse_support(std::size_t d, double density, Rng &rng)
	{
		const auto k = static_cast<std::size_t>(std::ceil(density * static_cast<double>(d) - 1e-9 * std::max(1.0, density * d)));
		std::vector<std::size_t> order(d);
		for (std::size_t j = 0; j < d; j++)
			order[j] = j;
		shuffle(order, rng);
		order.resize(std::clamp<std::size_t>(k, 1, d));
		std::sort(order.begin(), order.end());
		return order;
	}
}

void Dataset::validate() const
{
	const std::size_t n = features.rows();
	if (is_classification()) {
		if (labels.size() != n)
			throw Error("Dataset: " + std::to_string(labels.size()) + " labels for " + std::to_string(n) + " samples");
		for (std::size_t i = 0; i < n; i++)
			if (labels[i] >= n_classes)
				throw Error("Dataset: label " + std::to_string(labels[i]) + " at row " + std::to_string(i)
						+ " is not below n_classes=" + std::to_string(n_classes));
	} else if (targets.size() != n)
		throw Error("Dataset: " + std::to_string(targets.size()) + " targets for " + std::to_string(n) + " samples");
}

Dataset Dataset::subset(std::span<const std::size_t> rows, const std::string &split_name) const
{
	Dataset out;
	out.n_classes = n_classes;
	out.split = split_name;
	out.features = Matrix(rows.size(), dims());
	for (std::size_t i = 0; i < rows.size(); i++) {
		const auto src = features.row(rows[i]);
		std::copy(src.begin(), src.end(), out.features.row(i).begin());
		if (is_classification())
			out.labels.push_back(labels[rows[i]]);
		else
			out.targets.push_back(targets[rows[i]]);
	}
	return out;
}

void SynthSpec::validate() const
{
	if (n == 0 || d == 0)
		throw Error("SynthSpec: n and d must be positive");
	if (!(true_density > 0.0 && true_density <= 1.0))
		throw Error("SynthSpec: true_density must lie in (0, 1]");
	if (!(noise_std >= 0.0))
		throw Error("SynthSpec: noise_std must be non-negative");
}

Regression gen_sparse_regression(const SynthSpec &spec)
{
	spec.validate();
	const Rng root(spec.seed);
	Rng support_rng = root.substream(0);
	Rng value_rng = root.substream(1);
	Rng feature_rng = root.substream(2);
	Rng noise_rng = root.substream(3);

	Regression out;
	out.true_weights.assign(spec.d, 0.0);
	for (std::size_t j : sparse_support(spec.d, spec.true_density, support_rng)) {
		// magnitude in [0.5, 2) keeps every support coordinate clearly nonzero
		const double magnitude = 0.5 + 1.5 * value_rng.uniform();
		out.true_weights[j] = value_rng.uniform() < 0.5 ? -magnitude : magnitude;
	}
	out.data.features = Matrix(spec.n, spec.d);
	for (auto &x : out.data.features.flat())
		x = feature_rng.normal();
	out.data.targets.resize(spec.n);
	for (std::size_t i = 0; i < spec.n; i++)
		out.data.targets[i] = dot(out.data.features.row(i), out.true_weights) + spec.noise_std * noise_rng.normal();
	return out;
}

Dataset gen_sparse_classification(const SynthSpec &spec)
{
	spec.validate();
	if (spec.n_classes < 2)
		throw Error("gen_sparse_classification: need at least two classes");
	const Rng root(spec.seed);
	Rng mean_rng = root.substream(0);
	Rng label_rng = root.substream(1);
	Rng noise_rng = root.substream(2);

	Matrix means(spec.n_classes, spec.d);
	for (std::size_t c = 0; c < spec.n_classes; c++) {
		Rng support_rng = mean_rng.substream(c);
		for (std::size_t j : sparse_support(spec.d, spec.true_density, support_rng))
			means(c, j) = support_rng.uniform() < 0.5 ? -spec.separation : spec.separation;
	}

	Dataset out;
	out.n_classes = spec.n_classes;
	out.labels.resize(spec.n);
	for (std::size_t i = 0; i < spec.n; i++)
		out.labels[i] = i % spec.n_classes;
	shuffle(out.labels, label_rng);
	out.features = Matrix(spec.n, spec.d);
	for (std::size_t i = 0; i < spec.n; i++)
		for (std::size_t j = 0; j < spec.d; j++)
			out.features(i, j) = means(out.labels[i], j) + spec.noise_std * noise_rng.normal();
	return out;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset &data, double test_fraction, std::uint64_t seed)
{
	if (!(test_fraction > 0.0 && test_fraction < 1.0))
		throw Error("train_test_split: test_fraction must lie in (0, 1)");
	std::vector<std::size_t> order(data.size());
	for (std::size_t i = 0; i < order.size(); i++)
		order[i] = i;
	Rng rng(seed, split_stream);
	shuffle(order, rng);
	const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(data.size())));
	const std::span<const std::size_t> all(order);
	return {data.subset(all.subspan(n_test), "train"), data.subset(all.first(n_test), "test")};
}

IdxImages read_idx_images(const std::filesystem::path &path)
{
	const auto bytes = read_bytes(path);
	check_magic(read_be32(bytes, 0, path), idx_images_magic, path);
	const std::uint32_t count = read_be32(bytes, 4, path);
	IdxImages images;
	images.rows = read_be32(bytes, 8, path);
	images.cols = read_be32(bytes, 12, path);
	const std::size_t needed = std::size_t{count} * images.rows * images.cols;
	check_payload(bytes.size() - 16, needed, 16, path);
	images.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(needed));
	return images;
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path &path)
{
	const auto bytes = read_bytes(path);
	check_magic(read_be32(bytes, 0, path), idx_labels_magic, path);
	const std::uint32_t count = read_be32(bytes, 4, path);
	check_payload(bytes.size() - 8, count, 8, path);
	return {bytes.begin() + 8, bytes.begin() + 8 + count};
}

void write_idx_images(const std::filesystem::path &path, const IdxImages &images)
{
	if (images.rows * images.cols == 0 || images.pixels.size() % (images.rows * images.cols) != 0)
		throw Error("write_idx_images: pixel buffer is not a whole number of images");
	std::vector<std::uint8_t> bytes;
	bytes.reserve(16 + images.pixels.size());
	append_be32(bytes, idx_images_magic);
	append_be32(bytes, static_cast<std::uint32_t>(images.count()));
	append_be32(bytes, images.rows);
	append_be32(bytes, images.cols);
	bytes.insert(bytes.end(), images.pixels.begin(), images.pixels.end());
	write_bytes(path, bytes);
}

void write_idx_labels(const std::filesystem::path &path, const std::vector<std::uint8_t> &labels)
{
	std::vector<std::uint8_t> bytes;
	bytes.reserve(8 + labels.size());
	append_be32(bytes, idx_labels_magic);
	append_be32(bytes, static_cast<std::uint32_t>(labels.size()));
	bytes.insert(bytes.end(), labels.begin(), labels.end());
	write_bytes(path, bytes);
}

Dataset load_idx_images(const std::filesystem::path &images_path, const std::filesystem::path &labels_path)
{
	const IdxImages images = read_idx_images(images_path);
	const auto labels = read_idx_labels(labels_path);
	if (labels.size() != images.count())
		throw Error("'" + labels_path.string() + "': label count " + std::to_string(labels.size())
				+ " (header byte offset 4) does not match image count " + std::to_string(images.count()));

	Dataset out;
	out.n_classes = 10;
	out.features = Matrix(images.count(), std::size_t{images.rows} * images.cols);
	auto flat = out.features.flat();
	for (std::size_t i = 0; i < images.pixels.size(); i++)
		flat[i] = images.pixels[i] / 255.0;
	out.labels.assign(labels.begin(), labels.end());
	out.validate();
	return out;
}

IdxImages to_idx_images(const Dataset &data, std::uint32_t rows, std::uint32_t cols)
{
	if (std::size_t{rows} * cols != data.dims())
		throw Error("to_idx_images: image shape does not match feature count");
	IdxImages images;
	images.rows = rows;
	images.cols = cols;
	images.pixels.reserve(data.features.size());
	for (double v : data.features.flat()) {
		const double scaled = v * 255.0;
		const double level = std::round(scaled);
		if (level < 0.0 || level > 255.0 || std::fabs(scaled - level) > 1e-6)
			throw Error("to_idx_images: feature " + std::to_string(v) + " is not a pixel level");
		images.pixels.push_back(static_cast<std::uint8_t>(level));
	}
	return images;
}

void write_dataset_csv(const std::filesystem::path &path, const Dataset &data)
{
	std::ofstream out(path);
	if (!out)
		throw Error("cannot write '" + path.string() + "'");
	out << std::setprecision(17);
	for (std::size_t j = 0; j < data.dims(); j++)
		out << 'f' << j << ',';
	out << "target\n";
	for (std::size_t i = 0; i < data.size(); i++) {
		for (double v : data.features.row(i))
			out << v << ',';
		if (data.is_classification())
			out << data.labels[i] << '\n';
		else
			out << data.targets[i] << '\n';
	}
}

} // namespace projreg
