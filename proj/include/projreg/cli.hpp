#ifndef PROJREG_CLI_HPP
#define PROJREG_CLI_HPP

#include <projreg/numerics.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace projreg::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
	exit_ok = 0,
	exit_check_failed = 1, ///< an asserted property failed or training diverged
	exit_usage = 2
};

/// Bad flags, bad config files, incompatible option combinations.
class UsageError : public Error {
public:
	using Error::Error;
};

struct ConfigEntry {
	std::string key;
	std::string value;
	int line = 0;
};

/**
 * Reads a run configuration: either a single JSON object or flat
 * `key = value` lines (blank lines and `#` comments ignored). Parse errors
 * raise UsageError with the offending line number. An empty file yields no
 * entries.
 */
std::vector<ConfigEntry> load_config(const std::filesystem::path &path);

/// Resolved parameters for one subcommand: defaults, then config file, then flags.
class RunConfig {
public:
	struct Param {
		std::string key;
		std::string value;
		std::string help;
		bool required = false;
		bool set = false;
	};

	explicit RunConfig(std::string subcommand);

	void declare(const std::string &key, const std::string &default_value, const std::string &help);
	void declare_required(const std::string &key, const std::string &help);

	/// Unknown keys raise UsageError naming the key.
	void apply(const std::vector<ConfigEntry> &entries);
	void set(const std::string &key, const std::string &value);
	/// Raises UsageError for required parameters that were never set.
	void check_required() const;

	bool has(const std::string &key) const;
	const std::string &get(const std::string &key) const;
	double get_double(const std::string &key) const;
	long get_int(const std::string &key) const;
	std::uint64_t get_u64(const std::string &key) const;
	bool get_bool(const std::string &key) const;
	std::vector<double> get_doubles(const std::string &key) const;
	std::vector<std::size_t> get_sizes(const std::string &key) const;

	const std::string &subcommand() const noexcept { return m_subcommand; }
	const std::vector<Param> &params() const noexcept { return m_params; }

	/// key = value lines, loadable again with load_config.
	void write_audit(const std::filesystem::path &path) const;

private:
	Param &find(const std::string &key);
	const Param &find(const std::string &key) const;

	std::string m_subcommand;
	std::vector<Param> m_params;
};

/// Shortest round-trip decimal representation.
std::string format_double(double v);

/// Entry point used by the `projreg` executable. Never throws.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace projreg::cli

#endif // PROJREG_CLI_HPP
