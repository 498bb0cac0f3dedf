#include <projreg/analysis.hpp>
#include <projreg/cli.hpp>
#include <projreg/data.hpp>
#include <projreg/penalty.hpp>
#include <projreg/train.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

namespace projreg::cli {

namespace {
	/// Raised by a subcommand whose asserted property failed.
	class CheckFailure : public Error {
	public:
		using Error::Error;
	};

	struct Subcommand {
		std::string name;
		std::string description;
		std::function<void(RunConfig &)> declare;
		std::function<int(const RunConfig &, std::ostream &)> run;
	};

	void declare_shared(RunConfig &cfg, const std::string &default_out, const std::string &default_seed)
	{
		cfg.declare("seed", default_seed, "random seed");
		cfg.declare("out", default_out, "output CSV path (audit file written to <out>.config)");
	}

	void declare_sampler(RunConfig &cfg, const std::string &selection, const std::string &threshold, const std::string &experiments)
	{
		cfg.declare("sp", "0.01", "sampling density s_p");
		cfg.declare("S", experiments, "experiments per penalty evaluation");
		cfg.declare("T", threshold, "selection threshold");
		cfg.declare("alpha", "0.9", "momentum coefficient");
		cfg.declare("momentum", "true", "blend with the previous step's distribution");
		cfg.declare("selection", selection, "topk|prob-threshold|uniform-threshold|weighted");
		cfg.declare("score-mode", "magnitude", "magnitude|literal");
	}

	template<typename Parse>
	auto parse_or_usage(Parse parse, const std::string &text)
	{
		try {
			return parse(text);
		} catch (const UsageError &) {
			throw;
		} catch (const Error &e) {
			throw UsageError(e.what());
		}
	}

	SamplerConfig sampler_from(const RunConfig &cfg)
	{
		SamplerConfig s;
		s.density = cfg.get_double("sp");
		s.experiments = static_cast<int>(cfg.get_int("S"));
		s.alpha = cfg.get_double("alpha");
		s.momentum = cfg.get_bool("momentum");
		s.selection_mode = parse_or_usage(parse_selection_mode, cfg.get("selection"));
		s.score_mode = parse_or_usage(parse_score_mode, cfg.get("score-mode"));
		const std::string threshold = cfg.get("T");
		// "auto": uniform-threshold keeps a coordinate with probability s_p
		s.threshold = (threshold == "auto") ? 1.0 - s.density : cfg.get_double("T");
		try {
			s.validate();
		} catch (const Error &e) {
			throw UsageError(e.what());
		}
		return s;
	}

	std::ofstream open_output(const RunConfig &cfg)
	{
		const std::filesystem::path path = cfg.get("out");
		if (path.has_parent_path())
			std::filesystem::create_directories(path.parent_path());
		std::ofstream out(path);
		if (!out)
			throw UsageError("cannot write output file '" + path.string() + "'");
		cfg.write_audit(path.string() + ".config");
		return out;
	}

	/// ceil(density * n) nonzeros at seeded positions; values from `value`.
	Vector sparse_parent(std::size_t n, double density, Rng rng, const std::function<double(Rng &)> &value)
	{
		SamplerConfig probe;
		probe.density = density;
		const std::size_t k = std::clamp<std::size_t>(probe.mask_size(n), 1, n);
		std::vector<std::size_t> positions(n);
		for (std::size_t j = 0; j < n; j++)
			positions[j] = j;
		shuffle(positions, rng);
		Vector w(n, 0.0);
		for (std::size_t i = 0; i < k; i++)
			w[positions[i]] = value(rng);
		return w;
	}

	// ---- verify-bound ----

	void declare_verify_bound(RunConfig &cfg)
	{
		cfg.declare_required("n", "vector length");
		cfg.declare("density", "0.01", "fraction of nonzero entries in the test vector");
		cfg.declare("T", "0.5", "uniform selection threshold; coordinates survive with probability 1-T");
		cfg.declare("S", "500", "Monte Carlo experiments");
		cfg.declare("sp", "0.01", "s_p used only for the scaled reference column");
		cfg.declare("tolerance", "0.02", "relative Monte Carlo tolerance");
		declare_shared(cfg, "verify-bound.csv", "42");
	}

	int run_verify_bound(const RunConfig &cfg, std::ostream &log)
	{
		const long n = cfg.get_int("n");
		const double density = cfg.get_double("density");
		const double tolerance = cfg.get_double("tolerance");
		if (n < 1)
			throw UsageError("--n must be positive");
		if (!(density > 0.0 && density <= 1.0))
			throw UsageError("--density must lie in (0, 1]");
		if (!(tolerance >= 0.0))
			throw UsageError("--tolerance must be non-negative");
		SamplerConfig sampler;
		sampler.selection_mode = SelectionMode::UniformThreshold;
		sampler.threshold = cfg.get_double("T");
		sampler.experiments = static_cast<int>(cfg.get_int("S"));
		sampler.density = cfg.get_double("sp");
		try {
			sampler.validate();
		} catch (const Error &e) {
			throw UsageError(e.what());
		}
		const std::uint64_t seed = cfg.get_u64("seed");
		const Vector w = sparse_parent(static_cast<std::size_t>(n), density, Rng(seed, 1), [](Rng &r) { return r.normal(); });

		std::ofstream out = open_output(cfg);
		out << "check,n,density,T,S,seed,lhs,rhs,scaled_rhs,holds\n";
		bool all_hold = true;
		const auto prefix = [&](const char *check, long experiments) {
			out << check << ',' << n << ',' << format_double(density) << ',' << format_double(sampler.threshold) << ','
				<< experiments << ',' << seed << ',';
		};
		if (n <= 20) {
			const JensenCheck exact = verify_jensen_small(w, sampler.threshold);
			prefix("exhaustive", 0);
			out << format_double(exact.exact_lhs) << ',' << format_double(exact.exact_rhs) << ",," << exact.holds() << '\n';
			all_hold = all_hold && exact.holds();
		}
		const BoundReport mc = verify_bound_mc(w, sampler, seed, tolerance);
		prefix("monte-carlo", mc.experiments);
		out << format_double(mc.mc_mean_lhs) << ',' << format_double(mc.analytic_rhs) << ','
			<< format_double(mc.bound_rhs_scaled) << ',' << mc.holds << '\n';
		all_hold = all_hold && mc.holds;
		if (!all_hold) {
			log << "verify-bound: bound violated\n";
			return exit_check_failed;
		}
		return exit_ok;
	}

	// ---- hist-norms ----

	void declare_hist_norms(RunConfig &cfg)
	{
		cfg.declare("sp", "0.01,0.05,0.1", "comma-separated sampling densities");
		cfg.declare("n", "10000", "parent vector length");
		cfg.declare("density", "0.01", "fraction of unit entries in the parent vector");
		cfg.declare("experiments", "10000", "masks drawn per sampling density");
		cfg.declare("bins", "50", "histogram bins");
		cfg.declare("bin-max", "norm", "upper edge of the last bin: 'norm' (||w||_2), a number, or inf");
		cfg.declare("selection", "weighted", "topk|weighted|uniform-threshold|prob-threshold");
		cfg.declare("score-mode", "magnitude", "magnitude|literal");
		cfg.declare("T", "0", "threshold for the threshold selection modes");
		declare_shared(cfg, "hist-norms.csv", "1");
	}

	int run_hist_norms(const RunConfig &cfg, std::ostream &)
	{
		const std::vector<double> densities = cfg.get_doubles("sp");
		if (densities.empty())
			throw UsageError("--sp needs at least one value");
		for (double sp : densities)
			if (!(sp > 0.0 && sp <= 1.0))
				throw UsageError("--sp values must lie in (0, 1], got " + format_double(sp));
		const long n = cfg.get_int("n");
		const long experiments = cfg.get_int("experiments");
		const long bins = cfg.get_int("bins");
		const double density = cfg.get_double("density");
		if (n < 1 || experiments < 1 || bins < 1)
			throw UsageError("--n, --experiments and --bins must be positive");
		if (!(density > 0.0 && density <= 1.0))
			throw UsageError("--density must lie in (0, 1]");
		const std::uint64_t seed = cfg.get_u64("seed");
		const Vector w = sparse_parent(static_cast<std::size_t>(n), density, Rng(seed, 1), [](Rng &) { return 1.0; });
		const double hi = cfg.get("bin-max") == "norm" ? l2_norm(w) : cfg.get_double("bin-max");
		std::vector<double> edges;
		try {
			edges = uniform_edges(static_cast<int>(bins), hi);
		} catch (const Error &e) {
			throw UsageError(e.what());
		}

		SamplerConfig sampler;
		sampler.selection_mode = parse_or_usage(parse_selection_mode, cfg.get("selection"));
		sampler.score_mode = parse_or_usage(parse_score_mode, cfg.get("score-mode"));
		sampler.threshold = cfg.get_double("T");
		std::ofstream out = open_output(cfg);
		out << "s_p,bin_lo,bin_hi,count\n";
		for (double sp : densities) {
			sampler.density = sp;
			Histogram h;
			try {
				h = norm_histogram(w, sampler, static_cast<int>(experiments), seed, edges);
			} catch (const Error &e) {
				throw UsageError(e.what());
			}
			for (std::size_t b = 0; b < h.counts.size(); b++)
				out << format_double(sp) << ',' << format_double(h.bin_edges[b]) << ',' << format_double(h.bin_edges[b + 1])
					<< ',' << h.counts[b] << '\n';
		}
		return exit_ok;
	}

	// ---- penalty-sweep ----

	void declare_penalty_sweep(RunConfig &cfg)
	{
		cfg.declare("n", "1000", "vector length");
		cfg.declare("densities", "0.001..1/40", "comma list, or lo..hi/points for a log grid");
		declare_sampler(cfg, "uniform-threshold", "auto", "500");
		declare_shared(cfg, "penalty-sweep.csv", "1");
	}

	int run_penalty_sweep(const RunConfig &cfg, std::ostream &)
	{
		const std::vector<double> densities = cfg.get_doubles("densities");
		if (densities.empty())
			throw UsageError("--densities grid is empty");
		for (double d : densities)
			if (!(d > 0.0 && d <= 1.0))
				throw UsageError("--densities values must lie in (0, 1]");
		const long n = cfg.get_int("n");
		if (n < 1)
			throw UsageError("--n must be positive");
		const SamplerConfig sampler = sampler_from(cfg);
		const auto rows = penalty_density_sweep(static_cast<std::size_t>(n), densities, sampler, cfg.get_u64("seed"));
		std::ofstream out = open_output(cfg);
		out << "density,r_l1,r_l2,r_proposed\n";
		for (const auto &r : rows)
			out << format_double(r.density) << ',' << format_double(r.r_l1) << ',' << format_double(r.r_l2) << ','
				<< format_double(r.r_proposed) << '\n';
		return exit_ok;
	}

	// ---- train ----

	void declare_train(RunConfig &cfg)
	{
		cfg.declare("task", "synth-cls", "synth-reg|synth-cls|digits");
		cfg.declare("reg", "none", "none|l1|l2|proposed");
		cfg.declare("loss", "auto", "mse|ce|projected-ce (auto: mse for synth-reg, ce otherwise)");
		cfg.declare("penalty", "squared", "proposed penalty variant: squared|sqrt");
		cfg.declare("lambda", "1e-4", "penalty weight");
		cfg.declare("normalize", "true", "divide lambda by the index counter's max");
		declare_sampler(cfg, "topk", "0", "10");
		cfg.declare("epochs", "20", "training epochs");
		cfg.declare("lr", "0.001", "learning rate");
		cfg.declare("batch", "32", "batch size");
		cfg.declare("optimizer", "adam", "adam|sgd");
		cfg.declare("hidden", "", "comma-separated hidden layer widths (empty: linear model)");
		cfg.declare("n", "5000", "synthetic samples");
		cfg.declare("d", "500", "synthetic feature dimension");
		cfg.declare("classes", "10", "synthetic classes");
		cfg.declare("true-density", "0.02", "density of the synthetic ground truth");
		cfg.declare("noise", "1.0", "synthetic noise standard deviation");
		cfg.declare("separation", "1.0", "magnitude of nonzero class-mean entries");
		cfg.declare("test-fraction", "0.2", "held-out fraction for synthetic tasks");
		cfg.declare("data-dir", "data/digits", "directory holding the digits IDX files");
		cfg.declare("metric-threshold", "1e-3", "|w| above which a weight counts as present");
		declare_shared(cfg, "train.csv", "42");
	}

	int run_train(const RunConfig &cfg, std::ostream &log)
	{
		const std::string task = cfg.get("task");
		if (task != "synth-reg" && task != "synth-cls" && task != "digits")
			throw UsageError("--task must be synth-reg, synth-cls or digits");
		TrainConfig tc;
		tc.reg = parse_or_usage(parse_reg_kind, cfg.get("reg"));
		const std::string loss = cfg.get("loss");
		tc.loss = loss == "auto" ? (task == "synth-reg" ? LossKind::MSE : LossKind::CrossEntropy)
				: parse_or_usage(parse_loss_kind, loss);
		if ((task == "synth-reg") != (tc.loss == LossKind::MSE))
			throw UsageError("--loss " + to_string(tc.loss) + " is incompatible with --task " + task);
		const std::string variant = cfg.get("penalty");
		if (variant != "squared" && variant != "sqrt")
			throw UsageError("--penalty must be squared or sqrt");
		tc.penalty.family = variant == "sqrt" ? PenaltyFamily::ProposedSqrt : PenaltyFamily::ProposedSquared;
		tc.penalty.lambda = cfg.get_double("lambda");
		tc.penalty.normalize_by_counter = cfg.get_bool("normalize");
		tc.sampler = sampler_from(cfg);
		tc.epochs = static_cast<int>(cfg.get_int("epochs"));
		tc.learning_rate = cfg.get_double("lr");
		const long batch = cfg.get_int("batch");
		if (batch < 1)
			throw UsageError("--batch must be positive");
		tc.batch_size = static_cast<std::size_t>(batch);
		tc.optimizer = parse_or_usage(parse_optimizer_kind, cfg.get("optimizer"));
		tc.seed = cfg.get_u64("seed");
		tc.metric_threshold = cfg.get_double("metric-threshold");
		try {
			tc.validate();
		} catch (const Error &e) {
			throw UsageError(e.what());
		}

		Dataset train_set;
		Dataset test_set;
		if (task == "digits") {
			const std::filesystem::path dir = cfg.get("data-dir");
			try {
				train_set = load_idx_images(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
				test_set = load_idx_images(dir / "test-images-idx3-ubyte", dir / "test-labels-idx1-ubyte");
			} catch (const Error &e) {
				throw UsageError(e.what());
			}
			train_set.split = "train";
			test_set.split = "test";
		} else {
			SynthSpec spec;
			const long n = cfg.get_int("n");
			const long d = cfg.get_int("d");
			const long classes = cfg.get_int("classes");
			if (n < 2 || d < 1 || classes < 2)
				throw UsageError("--n must be >= 2, --d >= 1 and --classes >= 2");
			spec.n = static_cast<std::size_t>(n);
			spec.d = static_cast<std::size_t>(d);
			spec.n_classes = static_cast<std::size_t>(classes);
			spec.true_density = cfg.get_double("true-density");
			spec.noise_std = cfg.get_double("noise");
			spec.separation = cfg.get_double("separation");
			spec.seed = tc.seed;
			Dataset all;
			try {
				all = task == "synth-reg" ? gen_sparse_regression(spec).data : gen_sparse_classification(spec);
				std::tie(train_set, test_set) = train_test_split(all, cfg.get_double("test-fraction"), tc.seed);
			} catch (const Error &e) {
				throw UsageError(e.what());
			}
		}

		std::vector<std::size_t> sizes{train_set.dims()};
		for (std::size_t h : cfg.get_sizes("hidden"))
			sizes.push_back(h);
		sizes.push_back(task == "synth-reg" ? 1 : train_set.n_classes);
		Rng init(tc.seed, 1);
		Model model = Model::dense(sizes, task == "synth-reg" ? Activation::Identity : Activation::SoftmaxOutput, init);

		std::ofstream out = open_output(cfg);
		out << "iteration,split,loss,accuracy,weight_magnitude,weight_density\n";
		std::vector<MetricsRow> rows;
		try {
			rows = train(model, train_set, test_set, tc);
		} catch (const DivergenceError &e) {
			log << "train: " << e.what() << '\n';
			return exit_check_failed;
		}
		for (const auto &r : rows)
			out << r.iteration << ',' << r.split << ',' << format_double(r.loss) << ',' << format_double(r.accuracy) << ','
				<< format_double(r.weight_magnitude) << ',' << format_double(r.weight_density) << '\n';
		return exit_ok;
	}

	std::vector<Subcommand> subcommands()
	{
		return {
			{"verify-bound", "check E||w.I||_2 <= sqrt((1-T) sum w^2) exhaustively (n <= 20) and by Monte Carlo",
				declare_verify_bound, run_verify_bound},
			{"hist-norms", "histogram the L2 norms of sampled projections of a sparse parent vector",
				declare_hist_norms, run_hist_norms},
			{"penalty-sweep", "L1, L2 and the projected penalty of unit vectors across densities",
				declare_penalty_sweep, run_penalty_sweep},
			{"train", "train a small model with the selected loss and regularizer; writes per-epoch metrics",
				declare_train, run_train},
		};
	}
}

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
	CLI::App app{"projreg: projected-penalty regularization experiments"};
	app.require_subcommand(1);
	const auto commands = subcommands();

	std::vector<std::unique_ptr<RunConfig>> configs;
	std::vector<std::vector<std::pair<std::string, std::string>>> flag_values(commands.size());
	std::vector<std::string> config_paths(commands.size());
	std::vector<CLI::App *> apps;
	std::vector<std::vector<std::pair<std::string, CLI::Option *>>> options(commands.size());
	std::vector<std::vector<std::string>> storage(commands.size());

	for (std::size_t c = 0; c < commands.size(); c++) {
		configs.push_back(std::make_unique<RunConfig>(commands[c].name));
		commands[c].declare(*configs.back());
		CLI::App *sub = app.add_subcommand(commands[c].name, commands[c].description);
		sub->add_option("--config", config_paths[c], "key=value or JSON config file; flags override it");
		storage[c].resize(configs.back()->params().size());
		for (std::size_t p = 0; p < configs.back()->params().size(); p++) {
			const auto &param = configs.back()->params()[p];
			std::string help = param.help + (param.required ? " (required)" : " (default: " + param.value + ")");
			options[c].emplace_back(param.key, sub->add_option("--" + param.key, storage[c][p], help));
		}
		apps.push_back(sub);
	}

	try {
		std::vector<std::string> args;
		for (int i = argc - 1; i > 0; i--)
			args.emplace_back(argv[i]);
		app.parse(args);
	} catch (const CLI::CallForHelp &e) {
		out << app.help();
		return exit_ok;
	} catch (const CLI::ParseError &e) {
		err << e.what() << '\n';
		err << app.help();
		return exit_usage;
	}

	for (std::size_t c = 0; c < commands.size(); c++) {
		if (!apps[c]->parsed())
			continue;
		RunConfig &cfg = *configs[c];
		try {
			if (!config_paths[c].empty())
				cfg.apply(load_config(config_paths[c]));
			for (std::size_t p = 0; p < options[c].size(); p++)
				if (options[c][p].second->count() > 0)
					cfg.set(options[c][p].first, storage[c][p]);
			cfg.check_required();
			return commands[c].run(cfg, err);
		} catch (const UsageError &e) {
			err << commands[c].name << ": " << e.what() << '\n';
			err << apps[c]->help();
			return exit_usage;
		} catch (const CheckFailure &e) {
			err << commands[c].name << ": " << e.what() << '\n';
			return exit_check_failed;
		} catch (const std::exception &e) {
			err << commands[c].name << ": " << e.what() << '\n';
			return exit_check_failed;
		}
	}
	err << app.help();
	return exit_usage;
}

} // namespace projreg::cli
