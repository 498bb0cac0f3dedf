#include <projreg/cli.hpp>

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

using namespace projreg;
namespace fs = std::filesystem;

namespace {
	struct Result {
		int code;
		std::string out;
		std::string err;
	};

	Result invoke(std::vector<std::string> args)
	{
		args.insert(args.begin(), "projreg");
		std::vector<const char *> argv;
		for (const auto &a : args)
			argv.push_back(a.c_str());
		std::ostringstream out, err;
		const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
		return {code, out.str(), err.str()};
	}

	fs::path scratch(const std::string &name)
	{
		const fs::path dir = fs::temp_directory_path() / "projreg_test_cli";
		fs::create_directories(dir);
		return dir / name;
	}

	std::string read_text(const fs::path &p)
	{
		std::ifstream in(p, std::ios::binary);
		return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
	}

	std::vector<std::vector<std::string>> read_csv(const fs::path &p)
	{
		std::vector<std::vector<std::string>> rows;
		std::istringstream in(read_text(p));
		std::string line;
		while (std::getline(in, line)) {
			std::vector<std::string> cells;
			std::istringstream cells_in(line);
			std::string cell;
			while (std::getline(cells_in, cell, ','))
				cells.push_back(cell);
			if (!line.empty() && line.back() == ',')
				cells.emplace_back();
			rows.push_back(cells);
		}
		return rows;
	}

	void write_text(const fs::path &p, const std::string &text)
	{
		std::ofstream(p, std::ios::binary) << text;
	}
}

TEST_CASE("verify-bound exit codes")
{
	const auto out = scratch("vb.csv").string();
	const auto mc = invoke({"verify-bound", "--n", "1000", "--density", "0.01", "--T", "0.5", "--S", "500", "--seed", "42",
			"--out", out});
	CHECK(mc.code == 0);
	auto rows = read_csv(out);
	REQUIRE(rows.size() == 2);
	CHECK(rows[0] == std::vector<std::string>{"check", "n", "density", "T", "S", "seed", "lhs", "rhs", "scaled_rhs", "holds"});
	CHECK(rows[1][0] == "monte-carlo");
	CHECK(rows[1][9] == "1");
	CHECK(fs::exists(out + ".config"));

	CHECK(invoke({"verify-bound", "--n", "8", "--T", "0.5", "--density", "0.5", "--out", out}).code == 0);
	rows = read_csv(out);
	REQUIRE(rows.size() == 3);
	CHECK(rows[1][0] == "exhaustive");

	const auto missing = invoke({"verify-bound", "--out", out});
	CHECK(missing.code == 2);
	CHECK(missing.err.find("--n") != std::string::npos);
	CHECK(invoke({"verify-bound", "--n", "10", "--T", "1.5", "--out", out}).code == 2);
	CHECK(invoke({"verify-bound", "--n", "ten", "--out", out}).code == 2);
	CHECK(invoke({}).code == 2);
	CHECK(invoke({"no-such-command"}).code == 2);
	CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("verify-bound rejects a negative tolerance")
{
	CHECK(invoke({"verify-bound", "--n", "50", "--tolerance", "-0.5", "--out", scratch("neg.csv").string()}).code == 2);
}

TEST_CASE("hist-norms writes one conserving histogram per density")
{
	const auto out = scratch("hist.csv").string();
	const auto r = invoke({"hist-norms", "--sp", "0.01,0.05,0.1", "--n", "2000", "--experiments", "500", "--bins", "20",
			"--seed", "1", "--out", out});
	REQUIRE(r.code == 0);
	const auto rows = read_csv(out);
	CHECK(rows[0] == std::vector<std::string>{"s_p", "bin_lo", "bin_hi", "count"});
	REQUIRE(rows.size() == 1 + 3 * 20);
	std::map<std::string, long> totals;
	for (std::size_t i = 1; i < rows.size(); i++)
		totals[rows[i][0]] += std::stol(rows[i][3]);
	CHECK(totals.size() == 3);
	for (const auto &[sp, total] : totals)
		CHECK(total == 500);

	const auto single = invoke({"hist-norms", "--sp", "0.05", "--n", "500", "--experiments", "300", "--bins", "1",
			"--bin-max", "inf", "--out", out});
	REQUIRE(single.code == 0);
	const auto one = read_csv(out);
	REQUIRE(one.size() == 2);
	CHECK(one[1] == std::vector<std::string>{"0.05", "0", "inf", "300"});

	CHECK(invoke({"hist-norms", "--sp", "0", "--out", out}).code == 2);
	CHECK(invoke({"hist-norms", "--sp", "0.01,1.5", "--out", out}).code == 2);
	CHECK(invoke({"hist-norms", "--bins", "4", "--bin-max", "inf", "--out", out}).code == 2);
	CHECK(invoke({"hist-norms", "--selection", "sideways", "--out", out}).code == 2);
}

TEST_CASE("penalty-sweep rows")
{
	const auto out = scratch("sweep.csv").string();
	REQUIRE(invoke({"penalty-sweep", "--densities", "0.5,1", "--S", "50", "--out", out}).code == 0);
	auto rows = read_csv(out);
	REQUIRE(rows.size() == 3);
	CHECK(rows[0] == std::vector<std::string>{"density", "r_l1", "r_l2", "r_proposed"});
	CHECK(rows[2][0] == "1");
	CHECK(std::fabs(std::stod(rows[2][2]) - 1.0) < 1e-12);

	REQUIRE(invoke({"penalty-sweep", "--densities", "0.2", "--S", "20", "--out", out}).code == 0);
	CHECK(read_csv(out).size() == 2);

	REQUIRE(invoke({"penalty-sweep", "--S", "20", "--out", out}).code == 0);
	CHECK(read_csv(out).size() == 41);

	CHECK(invoke({"penalty-sweep", "--densities", "", "--out", out}).code == 2);
	CHECK(invoke({"penalty-sweep", "--densities", "0.1..0.01/5", "--out", out}).code == 2);
}

TEST_CASE("train writes two rows per epoch")
{
	const auto out = scratch("train.csv").string();
	const auto r = invoke({"train", "--task", "synth-cls", "--reg", "proposed", "--sp", "0.01", "--alpha", "0.9", "--lambda",
			"1e-4", "--epochs", "3", "--n", "600", "--d", "60", "--seed", "42", "--out", out});
	REQUIRE(r.code == 0);
	const auto rows = read_csv(out);
	CHECK(rows[0] == std::vector<std::string>{"iteration", "split", "loss", "accuracy", "weight_magnitude", "weight_density"});
	REQUIRE(rows.size() == 1 + 6);
	CHECK(rows[5][0] == "3");
	CHECK(rows[5][1] == "train");
	CHECK(rows[6][1] == "test");

	const auto projected = invoke({"train", "--loss", "projected-ce", "--reg", "none", "--task", "synth-cls", "--epochs",
			"2", "--n", "400", "--d", "40", "--out", out});
	REQUIRE(projected.code == 0);
	for (const auto &row : read_csv(out))
		if (row[0] != "iteration")
			CHECK(std::isfinite(std::stod(row[2])));

	CHECK(invoke({"train", "--task", "synth-reg", "--epochs", "2", "--n", "200", "--d", "10", "--out", out}).code == 0);
	CHECK(invoke({"train", "--task", "synth-reg", "--loss", "ce", "--out", out}).code == 2);
	CHECK(invoke({"train", "--task", "synth-cls", "--loss", "mse", "--out", out}).code == 2);
	CHECK(invoke({"train", "--task", "imagenet", "--out", out}).code == 2);
	CHECK(invoke({"train", "--reg", "elastic", "--out", out}).code == 2);
	CHECK(invoke({"train", "--task", "digits", "--data-dir", scratch("nowhere").string(), "--out", out}).code == 2);
}

TEST_CASE("train reports divergence with exit code 1")
{
	const auto r = invoke({"train", "--task", "synth-reg", "--optimizer", "sgd", "--lr", "1e150", "--epochs", "3", "--n",
			"200", "--d", "10", "--out", scratch("diverge.csv").string()});
	CHECK(r.code == 1);
	CHECK(r.err.find("diverged at step") != std::string::npos);
}

TEST_CASE("config files and flag precedence")
{
	const auto out = scratch("cfg.csv").string();
	const auto kv = scratch("run.conf");
	write_text(kv, "# sweep settings\nsp = 0.05\n\nS = 20\ndensities = 0.3\n");
	REQUIRE(invoke({"penalty-sweep", "--config", kv.string(), "--sp", "0.01", "--out", out}).code == 0);
	const std::string audit = read_text(out + ".config");
	CHECK(audit.find("sp = 0.01\n") != std::string::npos);
	CHECK(audit.find("S = 20\n") != std::string::npos);

	const auto typo = scratch("typo.conf");
	write_text(typo, "S = 20\nspp = 0.05\n");
	const auto bad = invoke({"penalty-sweep", "--config", typo.string(), "--out", out});
	CHECK(bad.code == 2);
	CHECK(bad.err.find("'spp'") != std::string::npos);
	CHECK(bad.err.find("line 2") != std::string::npos);

	const auto empty = scratch("empty.conf");
	write_text(empty, "");
	CHECK(cli::load_config(empty).empty());
	REQUIRE(invoke({"penalty-sweep", "--config", empty.string(), "--densities", "0.5", "--S", "5", "--out", out}).code == 0);
	CHECK(read_text(out + ".config").find("sp = 0.01\n") != std::string::npos);

	const auto json = scratch("run.json");
	write_text(json, "{\n  \"densities\": [0.2, 0.4],\n  \"S\": 10,\n  \"momentum\": false\n}\n");
	REQUIRE(invoke({"penalty-sweep", "--config", json.string(), "--out", out}).code == 0);
	CHECK(read_csv(out).size() == 3);

	const auto broken = scratch("broken.json");
	write_text(broken, "{\n  \"S\": 10,\n  \"sp\": ,\n}\n");
	try {
		cli::load_config(broken);
		FAIL("expected a parse error");
	} catch (const cli::UsageError &e) {
		CHECK(std::string(e.what()).find(":3:") != std::string::npos);
	}
	const auto noeq = scratch("noeq.conf");
	write_text(noeq, "S = 1\nthis line has no equals sign\n");
	try {
		cli::load_config(noeq);
		FAIL("expected a parse error");
	} catch (const cli::UsageError &e) {
		CHECK(std::string(e.what()).find(":2:") != std::string::npos);
	}
	CHECK(invoke({"penalty-sweep", "--config", scratch("missing.conf").string(), "--out", out}).code == 2);
}

TEST_CASE("the audit file reproduces the run")
{
	const auto first = scratch("audit-a.csv").string();
	REQUIRE(invoke({"hist-norms", "--sp", "0.02", "--n", "800", "--experiments", "200", "--seed", "5", "--out", first}).code
			== 0);
	const auto second = scratch("audit-b.csv").string();
	REQUIRE(invoke({"hist-norms", "--config", first + ".config", "--out", second}).code == 0);
	CHECK(read_text(first) == read_text(second));
}

TEST_CASE("format_double round-trips")
{
	CHECK(cli::format_double(0.1) == "0.1");
	CHECK(cli::format_double(1.0) == "1");
	CHECK(cli::format_double(std::numeric_limits<double>::infinity()) == "inf");
	CHECK(std::stod(cli::format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
