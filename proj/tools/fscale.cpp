// fscale: synthesize data, learn spreading-behavior models, simulate
// cascade dynamics, and run the evaluation protocols.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fscale/baselines.hpp"
#include "fscale/eval.hpp"
#include "fscale/io.hpp"
#include "fscale/pipeline.hpp"
#include "fscale/propagation.hpp"
#include "fscale/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fscale;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int cmd_synth(const std::string& out_dir, std::size_t nodes, std::size_t messages,
              std::size_t m_per_node, double reciprocity, std::size_t topics,
              double delay_mean, const std::string& rule_name, std::size_t theta,
              std::uint64_t seed) {
    PlantedRule rule;
    if (rule_name == "logistic") {
        rule = PlantedRule::default_logistic();
    } else if (rule_name == "threshold") {
        rule.kind = PlantedRule::Kind::threshold;
        rule.theta = theta;
    } else {
        throw UsageError("unknown rule '" + rule_name + "'");
    }

    SocialGraph g = gen_network(nodes, m_per_node, reciprocity, seed);
    CorpusGenConfig cfg;
    cfg.n_messages = messages;
    cfg.n_topics = topics;
    cfg.delay_mean = delay_mean;
    Corpus corpus = gen_corpus(g, cfg, rule, seed);

    fs::create_directories(out_dir);
    write_graph(g, fs::path(out_dir) / "graph.tsv");
    write_cascades(corpus, g, fs::path(out_dir) / "cascades.jsonl");
    write_messages(corpus, fs::path(out_dir) / "messages.jsonl");
    write_profiles(corpus, g, fs::path(out_dir) / "profiles.jsonl");

    json manifest = {{"nodes", nodes},
                     {"messages", messages},
                     {"m_per_node", m_per_node},
                     {"reciprocity", reciprocity},
                     {"topics", topics},
                     {"delay_mean", delay_mean},
                     {"rule", rule_name},
                     {"theta", theta},
                     {"seed", seed}};
    std::size_t total_events = 0;
    for (const auto& c : corpus.cascades) total_events += c.events.size();
    manifest["total_events"] = total_events;
    save_json(manifest, fs::path(out_dir) / "manifest.json");
    std::cout << "wrote " << out_dir << ": " << nodes << " nodes, " << messages
              << " cascades, " << total_events << " events\n";
    return 0;
}

int cmd_train(const std::string& data_dir, const std::string& out_file, std::size_t folds,
              std::uint64_t seed, const std::string& baseline, const std::string& force) {
    DataDir d = load_data_dir(data_dir);
    if (!baseline.empty()) {
        LrcqParams p;
        if (baseline == "lrcq1") p.variant = 1;
        else if (baseline == "lrcq2") p.variant = 2;
        else throw UsageError("unknown baseline '" + baseline + "'");
        LrcqModel m = lrcq_train(d.graph, d.corpus, p, seed);
        save_json(m.to_json(), out_file);
        std::cout << "wrote " << baseline << " model to " << out_file << "\n";
        return 0;
    }

    LearnConfig cfg;
    cfg.folds = folds;
    cfg.seed = seed;
    if (!force.empty()) cfg.force_kind = kind_from_name(force);
    TrainedModel m = learn(d.graph, d.corpus, cfg);
    save_json(m.to_json(), out_file);

    if (!m.candidate_accuracy.empty()) {
        std::cout << "candidate classifier CV accuracy:\n";
        for (const auto& [k, acc] : m.candidate_accuracy)
            std::printf("  %-8s %.4f\n", k.c_str(), acc);
    }
    std::cout << "selected classifier: " << kind_name(m.classifier.kind()) << "\n";
    std::cout << "selected features (" << m.selected.size() << "/18):";
    for (std::size_t i : m.selected) std::cout << ' ' << kFeatureNames[i];
    std::cout << "\nfeature weights:\n";
    for (std::size_t i = 0; i < m.selected.size(); ++i)
        std::printf("  %-12s %.5f\n", kFeatureNames[m.selected[i]], m.weights[i]);
    std::printf("mechanism measure: CSM=%.5f TAM=%.5f SCM=%.5f EM=%.5f\n", m.mechanism[0],
                m.mechanism[1], m.mechanism[2], m.mechanism[3]);
    std::cout << "wrote model to " << out_file << "\n";
    return 0;
}

std::unique_ptr<BehaviorModel> load_behavior_model(const fs::path& file) {
    json j = load_json(file);
    if (j.value("format", "") != "fscale-model")
        throw DataError(file.string() + ": not a model file");
    if (j.contains("kind")) {
        std::string kind = j.at("kind").get<std::string>();
        if (kind == "lrcq1" || kind == "lrcq2")
            return std::make_unique<LrcqModel>(LrcqModel::from_json(j));
        throw DataError(file.string() + ": unsupported model kind '" + kind + "'");
    }
    return std::make_unique<LearnedBehaviorModel>(TrainedModel::from_json(j));
}

std::string model_label(const fs::path& file) {
    json j = load_json(file);
    if (j.contains("kind")) return j.at("kind").get<std::string>();
    return "fscalecp";
}

int cmd_simulate(const std::string& data_dir, const std::string& model_file,
                 const std::string& cascade_id, double observe_frac, double delta_t,
                 double horizon, std::uint64_t seed, const std::string& mode,
                 const std::string& out_file, const std::string& trace_file) {
    DataDir d = load_data_dir(data_dir);
    std::size_t mi = d.corpus.message_index(cascade_id);
    if (mi == Corpus::npos) throw DataError("cascade '" + cascade_id + "' not in corpus");
    auto model = load_behavior_model(model_file);

    const Cascade& truth = d.corpus.cascades[mi];
    if (truth.events.empty()) throw DataError("cascade '" + cascade_id + "' is empty");
    CascadeState obs = observe_fraction(d.graph, truth, observe_frac);

    SimConfig cfg;
    cfg.delta_T = delta_t;
    cfg.horizon_T = horizon;
    cfg.seed = seed;
    if (mode == "bernoulli") cfg.mode = SimConfig::Mode::bernoulli;
    else if (mode != "deterministic") throw UsageError("unknown mode '" + mode + "'");

    RunResult r = run(d.graph, d.corpus, std::move(obs), *model, cfg);
    write_cascade(r.predicted, d.graph, out_file);
    if (!trace_file.empty()) {
        auto f = open_out(trace_file);
        for (const auto& t : r.trace) {
            json j = {{"step", t.index},         {"N", t.shell_size},
                      {"IN", t.update_set_size}, {"dt", t.delta_t},
                      {"activations", t.activation_count}, {"t", t.t_after}};
            f << j.dump() << '\n';
        }
    }
    std::cout << "predicted " << r.predicted.events.size() << " activations ("
              << r.trace.size() << " steps) -> " << out_file << "\n";
    return 0;
}

int cmd_evaluate(const std::string& data_dir, const std::string& models_csv,
                 const std::string& experiment, const std::string& out_file,
                 const ExperimentConfig& cfg_in) {
    DataDir d = load_data_dir(data_dir);
    ExperimentConfig cfg = cfg_in;

    std::vector<std::unique_ptr<BehaviorModel>> owned;
    std::vector<NamedModel> models;
    std::stringstream ss(models_csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::string label = model_label(item);
        owned.push_back(load_behavior_model(item));
        models.emplace_back(label, owned.back().get());
    }
    if (models.empty()) throw UsageError("no models given");

    std::vector<ExperimentRow> rows;
    if (experiment == "states")
        rows = contagion_states_experiment(d.graph, d.corpus, models, cfg);
    else if (experiment == "process")
        rows = process_prediction_experiment(d.graph, d.corpus, models, cfg);
    else if (experiment == "size")
        rows = size_prediction_experiment(d.graph, d.corpus, models, cfg);
    else
        throw UsageError("unknown experiment '" + experiment + "'");

    auto f = open_out(out_file);
    f << rows_to_csv(rows);
    std::cout << "wrote " << rows.size() << " result rows to " << out_file << "\n";
    return 0;
}

int cmd_report(const std::string& results_file, const std::string& out_file,
               const std::string& model_file) {
    auto f = open_in(results_file);
    std::string line;
    if (!std::getline(f, line) || line != "experiment,method,group,fraction,metric,value")
        throw DataError(results_file + ": unexpected CSV header");
    json experiments = json::object();
    std::size_t ln = 1;
    while (std::getline(f, line)) {
        ++ln;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string exp, method, group, fraction, metric, value;
        if (!std::getline(ss, exp, ',') || !std::getline(ss, method, ',') ||
            !std::getline(ss, group, ',') || !std::getline(ss, fraction, ',') ||
            !std::getline(ss, metric, ',') || !std::getline(ss, value, ','))
            throw DataError(results_file + ":" + std::to_string(ln) + ": bad row");
        experiments[exp][method]["group_" + group][fraction][metric] = std::stod(value);
    }
    json report;
    report["experiments"] = experiments;
    if (!model_file.empty()) {
        json mj = load_json(model_file);
        report["classifier_comparison"] = mj.at("provenance").at("candidate_accuracy");
        report["mechanism_measure"] = mj.at("mechanism_measure");
        json weights = json::object();
        auto sel = mj.at("selected").get<std::vector<std::size_t>>();
        auto w = mj.at("weights").get<std::vector<double>>();
        for (std::size_t i = 0; i < sel.size(); ++i)
            weights[kFeatureNames[sel[i]]] = w[i];
        report["feature_weights"] = weights;
    }
    save_json(report, out_file);
    std::cout << "wrote " << out_file << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"full-scale cascade dynamics prediction"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    std::string out_dir;
    std::size_t nodes = 1000, messages = 200, m_per_node = 3, topics = 5, theta = 2;
    double reciprocity = 0.3, delay_mean = 600.0;
    std::string rule = "logistic";
    std::uint64_t seed = 0;
    synth->add_option("--out", out_dir)->required();
    synth->add_option("--nodes", nodes);
    synth->add_option("--messages", messages);
    synth->add_option("--m-per-node", m_per_node);
    synth->add_option("--reciprocity", reciprocity);
    synth->add_option("--topics", topics);
    synth->add_option("--delay-mean", delay_mean);
    synth->add_option("--rule", rule)->description("logistic | threshold");
    synth->add_option("--theta", theta);
    synth->add_option("--seed", seed);

    // train
    auto* train = app.add_subcommand("train", "learn the estimation model");
    std::string data_dir, model_out = "model.json", baseline, force_kind;
    std::size_t folds = 10;
    train->add_option("--data", data_dir)->required();
    train->add_option("--out", model_out);
    train->add_option("--folds", folds);
    train->add_option("--seed", seed);
    train->add_option("--baseline", baseline)->description("lrcq1 | lrcq2");
    train->add_option("--classifier", force_kind)
        ->description("skip model selection: logreg | gnb | cart | rforest");

    // simulate
    auto* sim = app.add_subcommand("simulate", "predict one cascade's dynamics");
    std::string model_file, cascade_id, pred_out = "pred.jsonl", trace_file, mode =
        "deterministic";
    double observe_frac = 0.1, delta_t = 300.0, horizon = 432000.0;
    sim->add_option("--data", data_dir)->required();
    sim->add_option("--model", model_file)->required();
    sim->add_option("--cascade", cascade_id)->required();
    sim->add_option("--observe-frac", observe_frac);
    sim->add_option("--delta-t", delta_t);
    sim->add_option("--horizon", horizon);
    sim->add_option("--seed", seed);
    sim->add_option("--mode", mode)->description("deterministic | bernoulli");
    sim->add_option("--out", pred_out);
    sim->add_option("--trace", trace_file);

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "run an experiment protocol");
    std::string models_csv, experiment = "states", results_out = "results.csv";
    ExperimentConfig ecfg;
    eval->add_option("--data", data_dir)->required();
    eval->add_option("--models", models_csv)->required();
    eval->add_option("--experiment", experiment)->description("states | process | size");
    eval->add_option("--out", results_out);
    eval->add_option("--fractions", ecfg.fractions);
    eval->add_option("--size-groups", ecfg.size_groups);
    eval->add_option("--per-group", ecfg.cascades_per_group);
    eval->add_option("--horizon", ecfg.horizon);
    eval->add_option("--delta-t", ecfg.delta_T);
    eval->add_option("--seed", ecfg.seed);
    eval->add_option("--threads", ecfg.threads);
    eval->add_option("--checkpoints", ecfg.checkpoints);

    // report
    auto* report = app.add_subcommand("report", "aggregate results into a report");
    std::string results_file, report_out = "report.json", report_model;
    report->add_option("--results", results_file)->required();
    report->add_option("--out", report_out);
    report->add_option("--model", report_model);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (synth->parsed())
            return cmd_synth(out_dir, nodes, messages, m_per_node, reciprocity, topics,
                             delay_mean, rule, theta, seed);
        if (train->parsed())
            return cmd_train(data_dir, model_out, folds, seed, baseline, force_kind);
        if (sim->parsed())
            return cmd_simulate(data_dir, model_file, cascade_id, observe_frac, delta_t,
                                horizon, seed, mode, pred_out, trace_file);
        if (eval->parsed()) {
            ecfg.seed = seed == 0 ? ecfg.seed : seed;
            return cmd_evaluate(data_dir, models_csv, experiment, results_out, ecfg);
        }
        if (report->parsed()) return cmd_report(results_file, report_out, report_model);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
