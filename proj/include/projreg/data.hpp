#ifndef PROJREG_DATA_HPP
#define PROJREG_DATA_HPP

#include <projreg/numerics.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace projreg {

struct Dataset {
	Matrix features;               ///< n x d
	Vector targets;                ///< regression targets (empty for classification)
	std::vector<std::size_t> labels; ///< class indices (empty for regression)
	std::size_t n_classes = 0;     ///< 0 for regression
	std::string split = "train";

	std::size_t size() const noexcept { return features.rows(); }
	std::size_t dims() const noexcept { return features.cols(); }
	bool is_classification() const noexcept { return n_classes > 0; }

	/// Throws Error if targets/labels disagree with the feature count or a label is out of range.
	void validate() const;
	Dataset subset(std::span<const std::size_t> rows, const std::string &split_name) const;
};

struct SynthSpec {
	std::size_t n = 1000;
	std::size_t d = 50;
	double true_density = 0.1;
	double noise_std = 0.1;
	std::size_t n_classes = 10;
	double separation = 3.0; ///< magnitude of the nonzero class-mean entries
	std::uint64_t seed = 0;

	void validate() const;
};

struct Regression {
	Dataset data;
	Vector true_weights;
};

/// y = X w* + N(0, noise_std^2); X standard normal; w* has ceil(true_density * d) nonzeros.
Regression gen_sparse_regression(const SynthSpec &spec);

/// Balanced class-conditional Gaussian clusters (std noise_std) around sparse class means.
Dataset gen_sparse_classification(const SynthSpec &spec);

/// Seeded split; the first `test_fraction` of a shuffled index order becomes the test set.
std::pair<Dataset, Dataset> train_test_split(const Dataset &data, double test_fraction, std::uint64_t seed);

/// Raw contents of an IDX image file (magic 0x00000803).
struct IdxImages {
	std::uint32_t rows = 0;
	std::uint32_t cols = 0;
	std::vector<std::uint8_t> pixels; ///< count * rows * cols, row-major per image

	std::size_t count() const noexcept { return rows * cols == 0 ? 0 : pixels.size() / (rows * cols); }
};

IdxImages read_idx_images(const std::filesystem::path &path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path &path);
void write_idx_images(const std::filesystem::path &path, const IdxImages &images);
void write_idx_labels(const std::filesystem::path &path, const std::vector<std::uint8_t> &labels);

/// Loads an image/label pair; pixels scaled by 1/255, one flattened image per row, 10 classes.
Dataset load_idx_images(const std::filesystem::path &images_path, const std::filesystem::path &labels_path);

/// Inverse of the pixel scaling; throws Error if a feature is not k/255 for integer k.
IdxImages to_idx_images(const Dataset &data, std::uint32_t rows, std::uint32_t cols);

/// Header row f0..f{d-1},target; then one row per sample.
void write_dataset_csv(const std::filesystem::path &path, const Dataset &data);

} // namespace projreg

#endif // PROJREG_DATA_HPP
