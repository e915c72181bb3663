// polyrx: dataset generation, training, quantization, evaluation,
// end-to-end poly-vs-oracle simulation and real-time budget reporting,
// driven by a JSON experiment spec plus flag overrides.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "polyrx/budget.hpp"
#include "polyrx/dataset.hpp"
#include "polyrx/errors.hpp"
#include "polyrx/experiment.hpp"
#include "polyrx/kernels.hpp"
#include "polyrx/weights_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace polyrx;

namespace {

struct CommonOpts {
    std::string spec_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

ExperimentSpec resolve_spec(const CommonOpts& opts) {
    ExperimentSpec spec;
    if (!opts.spec_path.empty()) spec = ExperimentSpec::load(opts.spec_path);
    if (!opts.out_dir.empty()) spec.out_dir = opts.out_dir;
    if (opts.seed_set) {
        spec.seed = opts.seed;
        spec.train.seed = opts.seed;
        spec.dataset.seed = opts.seed;
    } else if (const char* env = std::getenv("POLYRX_SEED")) {
        const std::uint64_t s = std::strtoull(env, nullptr, 10);
        spec.seed = s;
        spec.train.seed = s;
        spec.dataset.seed = s;
    }
    return spec;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--spec", opts.spec_path, "experiment spec (JSON)");
    cmd->add_option("--out", opts.out_dir, "output directory (overrides spec)");
    cmd->add_option("--seed", opts.seed, "seed override (also via POLYRX_SEED)")
        ->each([&opts](const std::string&) { opts.seed_set = true; });
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << text;
    if (!f) throw IoError("write failed for " + path.string());
}

fs::path ensure_out(const ExperimentSpec& spec) {
    fs::path out(spec.out_dir);
    fs::create_directories(out);
    return out;
}

// ---------------------------------------------------------------------------

int cmd_gen_dataset(const ExperimentSpec& spec) {
    spec.validate();
    const fs::path out = ensure_out(spec);
    const ClassCatalog catalog = spec.build_catalog();

    const TensorDataset train_ds = generate_dataset(catalog, spec.build_dataset_config(false));
    save_dataset(train_ds, catalog, (out / "train.iq").string());
    std::cout << "wrote " << (out / "train.iq").string() << " (" << train_ds.size()
              << " tensors, " << catalog.n_classes() << " classes)\n";

    if (spec.dataset.test_per_class > 0) {
        const TensorDataset test_ds = generate_dataset(catalog, spec.build_dataset_config(true));
        save_dataset(test_ds, catalog, (out / "test.iq").string());
        std::cout << "wrote " << (out / "test.iq").string() << " (" << test_ds.size()
                  << " tensors)\n";
    }
    write_text(out / "spec.json", spec.to_json_string() + "\n");
    return 0;
}

int cmd_train(const ExperimentSpec& spec) {
    spec.validate();
    const fs::path out = ensure_out(spec);
    const TensorDataset train_ds = load_dataset((out / "train.iq").string());

    RfnetArch arch = spec.build_arch(static_cast<int>(train_ds.class_names.size()));
    arch.input_w = train_ds.w;
    arch.input_h = train_ds.h;
    arch.validate();

    std::cout << "training on " << train_ds.size() << " tensors, " << arch.param_count()
              << " parameters, kernels=" << kernels::backend_name(kernels::active_backend())
              << "\n";
    const TrainResult res = train(train_ds.tensors, train_ds.labels, arch, spec.train);

    std::string csv = "epoch,loss,train_accuracy\n";
    for (std::size_t e = 0; e < res.epoch_loss.size(); ++e)
        csv += std::to_string(e) + "," + std::to_string(res.epoch_loss[e]) + "," +
               std::to_string(res.epoch_accuracy[e]) + "\n";
    write_text(out / "loss.csv", csv);

    RfnetModel model;
    model.arch = arch;
    model.float_params = res.params;
    save_model(model, (out / "weights.rfnet").string());
    std::cout << "final train accuracy " << res.epoch_accuracy.back() << ", wrote "
              << (out / "weights.rfnet").string() << "\n";

    if (fs::exists(out / "test.iq")) {
        const TensorDataset test_ds = load_dataset((out / "test.iq").string());
        const double acc = evaluate_accuracy(arch, res.params, test_ds.tensors, test_ds.labels);
        std::cout << "held-out accuracy " << acc << "\n";
    }
    return 0;
}

int cmd_quantize(const std::string& in_path, const std::string& out_path,
                 const std::string& format) {
    RfnetModel model = load_model(in_path);
    const FixedFormat fmt = FixedFormat::parse(format);
    RfnetModel fixed;
    fixed.arch = model.arch;
    fixed.format = fmt;
    if (model.float_params) {
        fixed.quant_params = quantize(*model.float_params, fmt);
    } else {
        // Already fixed point: re-quantizing is the identity.
        if (model.format != fmt) throw ParamError("input is fixed-point in a different format");
        fixed.quant_params = std::move(model.quant_params);
    }
    save_model(fixed, out_path);
    std::cout << "wrote " << out_path << " format " << fmt.name() << "\n";
    return 0;
}

int cmd_eval(const ExperimentSpec& spec, const std::string& weights, const std::string& dataset,
             bool fixed) {
    const fs::path out = ensure_out(spec);
    const std::string wpath = weights.empty() ? (out / (fixed ? "weights_fixed.rfnet" : "weights.rfnet")).string()
                                              : weights;
    const std::string dpath = dataset.empty() ? (out / "test.iq").string() : dataset;

    const RfnetModel model = load_model(wpath);
    const TensorDataset ds = load_dataset(dpath);
    const InferenceMode mode = fixed ? InferenceMode::Fixed : InferenceMode::Float;

    const auto cm = confusion_matrix(model, mode, ds.tensors, ds.labels);
    std::uint64_t correct = 0, total = 0;
    for (std::size_t r = 0; r < cm.size(); ++r)
        for (std::size_t c = 0; c < cm[r].size(); ++c) {
            total += cm[r][c];
            if (r == c) correct += cm[r][c];
        }
    const double acc = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
    write_text(out / "confusion.csv", confusion_to_csv(cm, ds.class_names));

    json j{{"weights", wpath},
           {"dataset", dpath},
           {"mode", fixed ? "fixed" : "float"},
           {"tensors", total},
           {"accuracy", acc}};
    write_text(out / "eval.json", j.dump(2) + "\n");
    std::cout << "accuracy " << acc << " over " << total << " tensors (" << (fixed ? "fixed" : "float")
              << "), confusion matrix in " << (out / "confusion.csv").string() << "\n";
    return 0;
}

int cmd_simulate(const ExperimentSpec& spec, const std::string& weights, bool oracle_only) {
    spec.validate();
    const fs::path out = ensure_out(spec);

    RfnetModel model;
    Classifier classifier;
    if (!oracle_only) {
        const std::string wpath =
            weights.empty() ? (out / (spec.run.inference == "fixed" ? "weights_fixed.rfnet"
                                                                    : "weights.rfnet"))
                                  .string()
                            : weights;
        model = load_model(wpath);
        classifier = model_classifier(model, spec.inference_mode());
    }

    SimulationSpec sim;
    sim.catalog = spec.build_catalog();
    sim.sample_rate_hz = spec.run.sample_rate_hz;
    sim.switch_time_s = spec.run.switch_time_s;
    sim.n_entries = spec.run.entries;
    sim.buffer_samples = spec.run.buffer_samples;
    sim.channel = spec.build_channel(0);
    sim.oracle_only = oracle_only;

    json summary;
    summary["seeds"] = json::array();
    double ratio_sum = 0.0, ratio_min = 1e300;
    for (int i = 0; i < spec.run.seeds; ++i) {
        sim.seed = spec.seed + static_cast<std::uint64_t>(i);
        const SimulationOutcome res = run_simulation(sim, classifier);
        const std::string tag = "seed" + std::to_string(i);
        write_text(out / ("oracle_" + tag + ".csv"), res.oracle.to_csv());
        if (!oracle_only) {
            write_text(out / ("report_" + tag + ".csv"), res.poly.to_csv());
            write_text(out / ("report_" + tag + ".json"), res.poly.to_json() + "\n");
            ratio_sum += res.ratio;
            ratio_min = std::min(ratio_min, res.ratio);
            summary["seeds"].push_back(json{{"seed", sim.seed},
                                            {"ratio", res.ratio},
                                            {"poly_bps", res.poly.total.throughput_bps},
                                            {"oracle_bps", res.oracle.total.throughput_bps},
                                            {"accuracy", res.poly.classification_accuracy}});
            std::cout << tag << ": poly/oracle ratio " << res.ratio << " (accuracy "
                      << res.poly.classification_accuracy << ")\n";
        } else {
            summary["seeds"].push_back(
                json{{"seed", sim.seed}, {"oracle_bps", res.oracle.total.throughput_bps}});
            std::cout << tag << ": oracle " << res.oracle.total.throughput_bps << " bps\n";
        }
    }
    if (!oracle_only) {
        summary["mean_ratio"] = ratio_sum / spec.run.seeds;
        summary["min_ratio"] = ratio_min;
        std::cout << "mean ratio " << ratio_sum / spec.run.seeds << ", min " << ratio_min << "\n";
    }
    write_text(out / "summary.json", summary.dump(2) + "\n");
    return 0;
}

struct BudgetOpts {
    double sample_rate = 5e6;
    std::int64_t buffer = 0;
    double t_buf = 0, t_in = 0, t_cn = 0, t_out = 0;
    double switch_time = 0;
    double clock_hz = 0;
    bool json_out = false;
};

int cmd_budget(const BudgetOpts& o, const ExperimentSpec& spec, bool have_spec) {
    json j;
    bool infeasible = false;
    j["sample_rate_hz"] = o.sample_rate;

    if (o.t_cn > 0) {
        const std::int64_t bmin = min_buffer_size(o.sample_rate, o.t_cn);
        j["min_buffer_samples"] = bmin;
        j["min_buffer_switch_time_s"] = min_switch_time_s(bmin - 1, o.sample_rate);
    }
    if (o.buffer > 0) {
        j["buffer_samples"] = o.buffer;
        j["switch_time_for_buffer_s"] = min_switch_time_s(o.buffer, o.sample_rate);
        j["expected_misaligned_samples"] = expected_misaligned_samples(o.buffer);
        BudgetInputs b;
        b.sample_rate_hz = o.sample_rate;
        b.buffer_samples = o.buffer;
        b.t_buf_s = o.t_buf;
        b.t_in_s = o.t_in;
        b.t_cn_s = o.t_cn;
        b.t_out_s = o.t_out;
        b.switch_time_s = o.switch_time;
        const FeasibilityResult r = is_realtime_feasible(b);
        j["load"] = r.load;
        j["slack"] = r.slack;
        j["feasible"] = r.feasible;
        infeasible = !r.feasible;
        if (o.switch_time > 0)
            j["inferences_per_switch"] = inferences_per_switch(o.switch_time, o.buffer, o.sample_rate);
    }
    if (o.clock_hz > 0 && have_spec) {
        const RfnetArch arch = spec.build_arch(spec.build_catalog().n_classes());
        j["pipeline_cycles"] = pipelined_cycle_count(arch);
        j["pipeline_latency_s"] = pipelined_latency_estimate_s(arch, o.clock_hz);
    }

    if (o.json_out) {
        std::cout << j.dump(2) << "\n";
    } else {
        for (const auto& [key, value] : j.items()) std::cout << key << ": " << value << "\n";
    }
    return infeasible ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"polymorphic receiver simulation suite"};
    app.require_subcommand(1);

    CommonOpts gen_opts, train_opts, eval_opts, sim_opts, budget_opts_common;

    auto* gen = app.add_subcommand("gen-dataset", "synthesize a balanced labeled tensor dataset");
    add_common(gen, gen_opts);
    int per_class_override = 0;
    gen->add_option("--per-class", per_class_override, "tensors per class (overrides spec)");

    auto* tr = app.add_subcommand("train", "train the classifier on a generated dataset");
    add_common(tr, train_opts);
    int epochs_override = 0;
    tr->add_option("--epochs", epochs_override, "epochs (overrides spec)");

    auto* qz = app.add_subcommand("quantize", "convert a float weight file to fixed point");
    std::string q_in, q_out, q_format = "fixed(32,10)";
    qz->add_option("--in", q_in, "input weight file")->required();
    qz->add_option("--out-file", q_out, "output weight file")->required();
    qz->add_option("--format", q_format, "fixed-point format");

    auto* ev = app.add_subcommand("eval", "evaluate weights on a dataset");
    add_common(ev, eval_opts);
    std::string ev_weights, ev_dataset;
    bool ev_fixed = false;
    ev->add_option("--weights", ev_weights, "weight file (default <out>/weights.rfnet)");
    ev->add_option("--dataset", ev_dataset, "dataset file (default <out>/test.iq)");
    ev->add_flag("--fixed", ev_fixed, "run the fixed-point forward pass");

    auto* sim = app.add_subcommand("simulate", "poly vs oracle throughput simulation");
    add_common(sim, sim_opts);
    std::string sim_weights;
    bool oracle_only = false;
    int seeds_override = 0;
    sim->add_option("--weights", sim_weights, "weight file");
    sim->add_flag("--oracle-only", oracle_only, "skip the polymorphic receiver");
    sim->add_option("--seeds", seeds_override, "number of simulation seeds (overrides spec)");

    auto* bd = app.add_subcommand("budget", "real-time feasibility calculus");
    add_common(bd, budget_opts_common);
    BudgetOpts bo;
    bd->add_option("--sample-rate", bo.sample_rate, "S, samples/sec");
    bd->add_option("--buffer", bo.buffer, "B, samples");
    bd->add_option("--t-buf", bo.t_buf, "DMA fill seconds");
    bd->add_option("--t-in", bo.t_in, "input transfer seconds");
    bd->add_option("--t-cn", bo.t_cn, "inference seconds");
    bd->add_option("--t-out", bo.t_out, "readback seconds");
    bd->add_option("--switch-time", bo.switch_time, "T_sw seconds");
    bd->add_option("--clock", bo.clock_hz, "pipeline clock for the cycle estimate");
    bd->add_flag("--json", bo.json_out, "JSON output");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            ExperimentSpec spec = resolve_spec(gen_opts);
            if (per_class_override > 0) spec.dataset.per_class = per_class_override;
            return cmd_gen_dataset(spec);
        }
        if (tr->parsed()) {
            ExperimentSpec spec = resolve_spec(train_opts);
            if (epochs_override > 0) spec.train.epochs = epochs_override;
            return cmd_train(spec);
        }
        if (qz->parsed()) return cmd_quantize(q_in, q_out, q_format);
        if (ev->parsed()) return cmd_eval(resolve_spec(eval_opts), ev_weights, ev_dataset, ev_fixed);
        if (sim->parsed()) {
            ExperimentSpec spec = resolve_spec(sim_opts);
            if (seeds_override > 0) spec.run.seeds = seeds_override;
            return cmd_simulate(spec, sim_weights, oracle_only);
        }
        if (bd->parsed()) {
            const bool have_spec = !budget_opts_common.spec_path.empty();
            return cmd_budget(bo, resolve_spec(budget_opts_common), have_spec);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
