#include <projreg/analysis.hpp>
#include <projreg/cli.hpp>

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace projreg::cli {

namespace {
	std::string trim(const std::string &s)
	{
		const auto first = s.find_first_not_of(" \t\r\n");
		if (first == std::string::npos)
			return {};
		const auto last = s.find_last_not_of(" \t\r\n");
		return s.substr(first, last - first + 1);
	}

	std::vector<std::string> split(const std::string &s, char sep)
	{
		std::vector<std::string> parts;
		std::string item;
		std::istringstream in(s);
		while (std::getline(in, item, sep))
			parts.push_back(trim(item));
		if (!s.empty() && s.back() == sep)
			parts.emplace_back();
		return parts;
	}

	double parse_double(const std::string &key, const std::string &text)
	{
		const std::string t = trim(text);
		if (t == "inf" || t == "+inf")
			return std::numeric_limits<double>::infinity();
		double v = 0.0;
		const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
		if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
			throw UsageError("parameter '" + key + "': '" + text + "' is not a number");
		return v;
	}

	int line_of(const std::string &text, std::size_t byte)
	{
		byte = std::min(byte, text.size());
		return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
	}

	std::string json_scalar(const nlohmann::json &v, const std::string &key)
	{
		if (v.is_string())
			return v.get<std::string>();
		if (v.is_boolean())
			return v.get<bool>() ? "true" : "false";
		if (v.is_number_integer() || v.is_number_unsigned())
			return v.dump();
		if (v.is_number_float())
			return format_double(v.get<double>());
		throw UsageError("config key '" + key + "': expected a string, number, boolean or array of those");
	}
}

std::string format_double(double v)
{
	if (std::isnan(v))
		return "nan";
	if (std::isinf(v))
		return v > 0 ? "inf" : "-inf";
	char buf[64];
	const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
	return std::string(buf, ptr);
}

std::vector<ConfigEntry> load_config(const std::filesystem::path &path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in)
		throw UsageError("cannot open config file '" + path.string() + "'");
	const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};

	std::vector<ConfigEntry> entries;
	const std::string stripped = trim(text);
	if (!stripped.empty() && stripped.front() == '{') {
		nlohmann::json doc;
		try {
			doc = nlohmann::json::parse(text);
		} catch (const nlohmann::json::parse_error &e) {
			throw UsageError(path.string() + ":" + std::to_string(line_of(text, e.byte)) + ": invalid JSON config");
		}
		if (!doc.is_object())
			throw UsageError(path.string() + ":1: JSON config must be a single object");
		for (const auto &[key, value] : doc.items()) {
			std::string joined;
			if (value.is_array()) {
				for (std::size_t i = 0; i < value.size(); i++)
					joined += (i ? "," : "") + json_scalar(value[i], key);
			} else
				joined = json_scalar(value, key);
			entries.push_back({key, joined, 1});
		}
		return entries;
	}

	std::istringstream lines(text);
	std::string line;
	int number = 0;
	while (std::getline(lines, line)) {
		number++;
		const std::string t = trim(line);
		if (t.empty() || t.front() == '#')
			continue;
		const auto eq = t.find('=');
		if (eq == std::string::npos)
			throw UsageError(path.string() + ":" + std::to_string(number) + ": expected key = value");
		const std::string key = trim(t.substr(0, eq));
		if (key.empty())
			throw UsageError(path.string() + ":" + std::to_string(number) + ": empty key");
		entries.push_back({key, trim(t.substr(eq + 1)), number});
	}
	return entries;
}

RunConfig::RunConfig(std::string subcommand) :
		m_subcommand(std::move(subcommand))
{
}

void RunConfig::declare(const std::string &key, const std::string &default_value, const std::string &help)
{
	m_params.push_back({key, default_value, help, false, false});
}

void RunConfig::declare_required(const std::string &key, const std::string &help)
{
	m_params.push_back({key, "", help, true, false});
}

RunConfig::Param &RunConfig::find(const std::string &key)
{
	auto it = std::find_if(m_params.begin(), m_params.end(), [&](const Param &p) { return p.key == key; });
	if (it == m_params.end())
		throw UsageError("unknown parameter '" + key + "' for " + m_subcommand);
	return *it;
}

const RunConfig::Param &RunConfig::find(const std::string &key) const
{
	return const_cast<RunConfig *>(this)->find(key);
}

void RunConfig::apply(const std::vector<ConfigEntry> &entries)
{
	for (const auto &e : entries) {
		if (e.key == "config")
			throw UsageError("config line " + std::to_string(e.line) + ": 'config' cannot be set from a config file");
		try {
			set(e.key, e.value);
		} catch (const UsageError &) {
			throw UsageError("config line " + std::to_string(e.line) + ": unknown key '" + e.key + "' for " + m_subcommand);
		}
	}
}

void RunConfig::set(const std::string &key, const std::string &value)
{
	Param &p = find(key);
	p.value = value;
	p.set = true;
}

void RunConfig::check_required() const
{
	for (const auto &p : m_params)
		if (p.required && !p.set)
			throw UsageError("missing required parameter --" + p.key);
}

bool RunConfig::has(const std::string &key) const
{
	return std::any_of(m_params.begin(), m_params.end(), [&](const Param &p) { return p.key == key; });
}

const std::string &RunConfig::get(const std::string &key) const
{
	return find(key).value;
}

double RunConfig::get_double(const std::string &key) const
{
	return parse_double(key, get(key));
}

long RunConfig::get_int(const std::string &key) const
{
	const std::string t = trim(get(key));
	long v = 0;
	const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
	if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
		throw UsageError("parameter '" + key + "': '" + t + "' is not an integer");
	return v;
}

std::uint64_t RunConfig::get_u64(const std::string &key) const
{
	const std::string t = trim(get(key));
	std::uint64_t v = 0;
	const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
	if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
		throw UsageError("parameter '" + key + "': '" + t + "' is not a non-negative integer");
	return v;
}

bool RunConfig::get_bool(const std::string &key) const
{
	const std::string t = trim(get(key));
	if (t == "true" || t == "1" || t == "yes" || t == "on")
		return true;
	if (t == "false" || t == "0" || t == "no" || t == "off")
		return false;
	throw UsageError("parameter '" + key + "': '" + t + "' is not a boolean");
}

std::vector<double> RunConfig::get_doubles(const std::string &key) const
{
	const std::string t = trim(get(key));
	if (t.empty())
		return {};
	// lo..hi/points is a log-spaced grid
	const auto dots = t.find("..");
	if (dots != std::string::npos) {
		const auto slash = t.find('/', dots);
		if (slash == std::string::npos)
			throw UsageError("parameter '" + key + "': grid syntax is lo..hi/points");
		const double lo = parse_double(key, t.substr(0, dots));
		const double hi = parse_double(key, t.substr(dots + 2, slash - dots - 2));
		const double points = parse_double(key, t.substr(slash + 1));
		if (!(lo > 0.0 && hi >= lo && points >= 1.0 && points == std::floor(points)))
			throw UsageError("parameter '" + key + "': grid needs 0 < lo <= hi and an integer point count");
		return log_grid(lo, hi, static_cast<int>(points));
	}
	std::vector<double> out;
	for (const auto &part : split(t, ','))
		out.push_back(parse_double(key, part));
	return out;
}

std::vector<std::size_t> RunConfig::get_sizes(const std::string &key) const
{
	std::vector<std::size_t> out;
	for (double v : get_doubles(key)) {
		if (!(v >= 1.0) || v != std::floor(v))
			throw UsageError("parameter '" + key + "': expected positive integers");
		out.push_back(static_cast<std::size_t>(v));
	}
	return out;
}

void RunConfig::write_audit(const std::filesystem::path &path) const
{
	std::ofstream out(path);
	if (!out)
		throw Error("cannot write audit file '" + path.string() + "'");
	out << "# projreg " << m_subcommand << " resolved configuration\n";
	for (const auto &p : m_params)
		out << p.key << " = " << p.value << '\n';
}

} // namespace projreg::cli
