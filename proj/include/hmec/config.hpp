#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "hmec/env.hpp"
#include "hmec/optim.hpp"
#include "hmec/placement.hpp"
#include "hmec/sched.hpp"

namespace hmec {

using Json = nlohmann::json;

enum class SchedulerKind { DnnAre, DrlAre, Greedy, Random, Local, Oracle };

inline const char* to_string(SchedulerKind k) {
    switch (k) {
    case SchedulerKind::DnnAre: return "DNN-ARE";
    case SchedulerKind::DrlAre: return "DRL-ARE";
    case SchedulerKind::Greedy: return "Greedy";
    case SchedulerKind::Random: return "Random";
    case SchedulerKind::Local: return "Local";
    case SchedulerKind::Oracle: return "Oracle";
    }
    return "?";
}

enum class AblationMode { DnnNoIncremental, DrlNoRefinement };

inline const char* to_string(AblationMode m) {
    return m == AblationMode::DnnNoIncremental ? "dnn_no_incremental" : "drl_no_refinement";
}

struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::size_t horizon = 200;
    std::size_t ue_start = 10;
    std::size_t ue_end = 10;
    std::vector<SchedulerKind> schedulers{SchedulerKind::DnnAre, SchedulerKind::DrlAre, SchedulerKind::Greedy,
                                          SchedulerKind::Random, SchedulerKind::Local};
    std::size_t score_window = 50; // summary "final" statistics cover the last this-many epochs
    bool timing = false;           // fills decisions_latency_ms; off keeps outputs byte-stable
};

struct SweepConfig {
    std::vector<std::size_t> ue_counts{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
    std::vector<SchedulerKind> schedulers{SchedulerKind::DnnAre, SchedulerKind::DrlAre, SchedulerKind::Greedy,
                                          SchedulerKind::Random, SchedulerKind::Local};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
};

struct AblationConfig {
    AblationMode mode = AblationMode::DnnNoIncremental;
    std::size_t horizon = 200;
    // The DNN pair runs on a growing population so the input distribution
    // drifts away from the pretraining corpus.
    std::size_t dnn_ue_start = 10;
    std::size_t dnn_ue_end = 50;
    std::size_t drl_ues = 10;
};

struct Config {
    Scenario scenario;
    std::vector<NodeSpec> nodes;
    KMeansOptions kmeans;
    bool freeze_placement = false;
    OptimizerBudget optimizer;
    NetConfig net;
    DnnAreConfig dnn = [] {
        DnnAreConfig d;
        d.pretrain_ues = 0; // 0: the UE count of the run's first epoch
        return d;
    }();
    DrlAreConfig drl;
    ExperimentConfig experiment;
    SweepConfig sweep;
    AblationConfig ablation;

    /// Controller configs with the shared net/optimizer sections folded in.
    DnnAreConfig dnn_config() const {
        DnnAreConfig c = dnn;
        c.net = net;
        c.budget = optimizer;
        return c;
    }
    DrlAreConfig drl_config() const {
        DrlAreConfig c = drl;
        c.net = net;
        return c;
    }
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string join_path(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

/// Typed read of an optional member; type mismatches name the field.
template <class T>
void read_opt(const Json& obj, const std::string& base, const char* key, T& out) {
    if (!obj.contains(key)) return;
    const Json& v = obj.at(key);
    const std::string path = join_path(base, key);
    try {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError("");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw ConfigError("");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError("");
            if (std::is_unsigned_v<T> && v.is_number_integer() && v.get<long long>() < 0) throw ConfigError("");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError("");
        }
        out = v.get<T>();
    } catch (const std::exception&) {
        throw ConfigError("config: field '" + path + "' has the wrong type or range");
    }
}

template <class T>
void read_req(const Json& obj, const std::string& base, const char* key, T& out) {
    if (!obj.contains(key)) throw ConfigError("config: missing required field '" + join_path(base, key) + "'");
    read_opt(obj, base, key, out);
}

inline const Json& section(const Json& root, const char* key) {
    static const Json empty = Json::object();
    if (!root.contains(key)) return empty;
    const Json& s = root.at(key);
    if (!s.is_object()) throw ConfigError(std::string("config: field '") + key + "' must be an object");
    return s;
}

inline void check_keys(const Json& obj, const std::string& base, std::initializer_list<const char*> known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw ConfigError("config: unknown field '" + join_path(base, it.key()) + "'");
    }
}

inline SchedulerKind parse_scheduler(const std::string& s) {
    std::string t;
    for (char c : s) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "dnn-are" || t == "dnn") return SchedulerKind::DnnAre;
    if (t == "drl-are" || t == "drl") return SchedulerKind::DrlAre;
    if (t == "greedy") return SchedulerKind::Greedy;
    if (t == "random") return SchedulerKind::Random;
    if (t == "local") return SchedulerKind::Local;
    if (t == "oracle") return SchedulerKind::Oracle;
    throw ConfigError("config: unknown scheduler '" + s + "'");
}

inline std::vector<SchedulerKind> read_schedulers(const Json& obj, const std::string& base,
                                                  std::vector<SchedulerKind> fallback) {
    if (!obj.contains("schedulers")) return fallback;
    const Json& v = obj.at("schedulers");
    if (!v.is_array() || v.empty())
        throw ConfigError("config: field '" + join_path(base, "schedulers") + "' must be a non-empty array");
    std::vector<SchedulerKind> out;
    for (const auto& e : v) {
        if (!e.is_string()) throw ConfigError("config: field '" + join_path(base, "schedulers") + "' must hold strings");
        out.push_back(parse_scheduler(e.get<std::string>()));
    }
    return out;
}

template <class T>
std::vector<T> read_list(const Json& obj, const std::string& base, const char* key, std::vector<T> fallback) {
    if (!obj.contains(key)) return fallback;
    const Json& v = obj.at(key);
    const std::string path = join_path(base, key);
    if (!v.is_array() || v.empty()) throw ConfigError("config: field '" + path + "' must be a non-empty array");
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        Json wrap = {{"v", v[i]}};
        T x{};
        try {
            read_opt(wrap, "", "v", x);
        } catch (const ConfigError&) {
            throw ConfigError("config: field '" + path + "[" + std::to_string(i) + "]' has the wrong type or range");
        }
        out.push_back(x);
    }
    return out;
}

inline Point2 read_point(const Json& obj, const std::string& base, const char* key, Point2 fallback) {
    if (!obj.contains(key)) return fallback;
    const Json& v = obj.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError("config: field '" + join_path(base, key) + "' must be [x, y]");
    return {v[0].get<double>(), v[1].get<double>()};
}

inline NodeKind parse_node_kind(const std::string& s, const std::string& path) {
    if (s == "GS") return NodeKind::GS;
    if (s == "GV") return NodeKind::GV;
    if (s == "UAV") return NodeKind::UAV;
    throw ConfigError("config: field '" + path + "' must be one of GS, GV, UAV");
}

inline const char* to_string(RefineMode m) {
    switch (m) {
    case RefineMode::Auto: return "auto";
    case RefineMode::Neighbor: return "neighbor";
    case RefineMode::Anneal: return "anneal";
    }
    return "?";
}

inline const char* to_string(ThresholdRule r) {
    switch (r) {
    case ThresholdRule::Fixed: return "fixed";
    case ThresholdRule::HalfMax: return "half_max";
    case ThresholdRule::Calibrated: return "calibrated";
    }
    return "?";
}

inline const char* to_string(AvgAllocSource s) { return s == AvgAllocSource::Register ? "register" : "history"; }

template <class E, std::size_t K>
E read_enum(const Json& obj, const std::string& base, const char* key, E fallback, const E (&values)[K]) {
    if (!obj.contains(key)) return fallback;
    std::string s;
    read_opt(obj, base, key, s);
    for (E e : values)
        if (s == to_string(e)) return e;
    throw ConfigError("config: field '" + join_path(base, key) + "' has unknown value '" + s + "'");
}

inline void read_budget(const Json& o, const std::string& p, OptimizerBudget& b) {
    check_keys(o, p,
               {"tier", "max_evals", "population", "generations", "tournament", "crossover_rate", "polish",
                "sa_initial_temp", "sa_cooling", "sa_steps", "refine", "neighbor_space_limit"});
    if (o.contains("tier")) {
        std::string t;
        read_opt(o, p, "tier", t);
        if (t == "exhaustive") b.tier = Tier::Exhaustive;
        else if (t == "heuristic") b.tier = Tier::Heuristic;
        else throw ConfigError("config: field '" + join_path(p, "tier") + "' must be exhaustive or heuristic");
    }
    read_opt(o, p, "max_evals", b.max_evals);
    read_opt(o, p, "population", b.population);
    read_opt(o, p, "generations", b.generations);
    read_opt(o, p, "tournament", b.tournament);
    read_opt(o, p, "crossover_rate", b.crossover_rate);
    read_opt(o, p, "polish", b.polish);
    read_opt(o, p, "sa_initial_temp", b.sa_initial_temp);
    read_opt(o, p, "sa_cooling", b.sa_cooling);
    read_opt(o, p, "sa_steps", b.sa_steps);
    static const RefineMode modes[] = {RefineMode::Auto, RefineMode::Neighbor, RefineMode::Anneal};
    b.refine = read_enum(o, p, "refine", b.refine, modes);
    read_opt(o, p, "neighbor_space_limit", b.neighbor_space_limit);
}

inline Json budget_json(const OptimizerBudget& b) {
    return {{"tier", b.tier == Tier::Exhaustive ? "exhaustive" : "heuristic"},
            {"max_evals", b.max_evals},
            {"population", b.population},
            {"generations", b.generations},
            {"tournament", b.tournament},
            {"crossover_rate", b.crossover_rate},
            {"polish", b.polish},
            {"sa_initial_temp", b.sa_initial_temp},
            {"sa_cooling", b.sa_cooling},
            {"sa_steps", b.sa_steps},
            {"refine", to_string(b.refine)},
            {"neighbor_space_limit", b.neighbor_space_limit}};
}

/// Byte offset -> "line L, column C" (1-based).
inline std::string locate(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

} // namespace detail

/// Builds a Config from a parsed document. Required: scenario.zone_width,
/// scenario.zone_height, and a non-empty `nodes` array whose entries carry
/// `kind` and `capacity_cps`. Everything else defaults.
inline Config config_from_json(const Json& root) {
    using namespace detail;
    if (!root.is_object()) throw ConfigError("config: top level must be an object");
    check_keys(root, "",
               {"scenario", "nodes", "placement", "optimizer", "net", "dnn", "drl", "experiment", "sweep", "ablation"});
    Config c;

    if (!root.contains("scenario")) throw ConfigError("config: missing required field 'scenario'");
    const Json& sc = section(root, "scenario");
    check_keys(sc, "scenario",
               {"zone_width", "zone_height", "epoch_seconds", "bandwidth_hz", "tx_power_watts", "noise_watts", "road",
                "ue_max_speed", "ue_local_capacity_cps", "uav_altitude_m", "channel", "tasks", "task_churn"});
    Scenario& s = c.scenario;
    read_req(sc, "scenario", "zone_width", s.zone_width);
    read_req(sc, "scenario", "zone_height", s.zone_height);
    read_opt(sc, "scenario", "epoch_seconds", s.epoch_seconds);
    read_opt(sc, "scenario", "bandwidth_hz", s.bandwidth_hz);
    read_opt(sc, "scenario", "tx_power_watts", s.tx_power_watts);
    read_opt(sc, "scenario", "noise_watts", s.noise_watts);
    if (sc.contains("road")) {
        const Json& r = sc.at("road");
        if (!r.is_array() || r.size() != 3 || !r[0].is_number() || !r[1].is_number() || !r[2].is_number())
            throw ConfigError("config: field 'scenario.road' must be [a, b, c]");
        s.road = {r[0].get<double>(), r[1].get<double>(), r[2].get<double>()};
    }
    read_opt(sc, "scenario", "ue_max_speed", s.ue_max_speed);
    read_opt(sc, "scenario", "ue_local_capacity_cps", s.ue_local_capacity_cps);
    read_opt(sc, "scenario", "uav_altitude_m", s.uav_altitude_m);
    {
        const Json& ch = section(sc, "channel");
        check_keys(ch, "scenario.channel", {"ref_gain", "exponent_air", "exponent_ground", "rayleigh"});
        read_opt(ch, "scenario.channel", "ref_gain", s.channel.ref_gain);
        read_opt(ch, "scenario.channel", "exponent_air", s.channel.exponent_air);
        read_opt(ch, "scenario.channel", "exponent_ground", s.channel.exponent_ground);
        read_opt(ch, "scenario.channel", "rayleigh", s.channel.rayleigh);
        const Json& tk = section(sc, "tasks");
        check_keys(tk, "scenario.tasks", {"cycles_min", "cycles_max", "bits_min", "bits_max", "weight"});
        read_opt(tk, "scenario.tasks", "cycles_min", s.tasks.cycles_min);
        read_opt(tk, "scenario.tasks", "cycles_max", s.tasks.cycles_max);
        read_opt(tk, "scenario.tasks", "bits_min", s.tasks.bits_min);
        read_opt(tk, "scenario.tasks", "bits_max", s.tasks.bits_max);
        read_opt(tk, "scenario.tasks", "weight", s.tasks.weight);
    }
    if (sc.contains("task_churn")) {
        std::string t;
        read_opt(sc, "scenario", "task_churn", t);
        if (t == "per_epoch") s.churn = TaskChurn::PerEpoch;
        else if (t == "fixed") s.churn = TaskChurn::Fixed;
        else throw ConfigError("config: field 'scenario.task_churn' must be per_epoch or fixed");
    }
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    if (!root.contains("nodes")) throw ConfigError("config: missing required field 'nodes'");
    const Json& nodes = root.at("nodes");
    if (!nodes.is_array() || nodes.empty()) throw ConfigError("config: field 'nodes' must be a non-empty array");
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const std::string p = "nodes[" + std::to_string(k) + "]";
        const Json& n = nodes[k];
        if (!n.is_object()) throw ConfigError("config: field '" + p + "' must be an object");
        check_keys(n, p, {"kind", "position", "capacity_cps", "coverage_radius_m", "altitude_m"});
        NodeSpec spec;
        std::string kind;
        read_req(n, p, "kind", kind);
        spec.kind = parse_node_kind(kind, p + ".kind");
        read_req(n, p, "capacity_cps", spec.capacity_cps);
        Point2 def = s.zone().center();
        if (spec.kind == NodeKind::GV) def = project_to_road(def, s.road, s.zone());
        spec.position = read_point(n, p, "position", def);
        if (spec.kind == NodeKind::UAV) spec.altitude_m = s.uav_altitude_m;
        read_opt(n, p, "altitude_m", spec.altitude_m);
        if (spec.kind == NodeKind::UAV) {
            spec.coverage_radius_m = 25.0;
            read_opt(n, p, "coverage_radius_m", spec.coverage_radius_m);
        } else if (n.contains("coverage_radius_m")) {
            read_opt(n, p, "coverage_radius_m", spec.coverage_radius_m);
        }
        try {
            validate_node(spec, s);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("config: " + p + ": " + e.what());
        }
        c.nodes.push_back(spec);
    }

    const Json& pl = section(root, "placement");
    check_keys(pl, "placement", {"max_iterations", "restarts", "freeze"});
    read_opt(pl, "placement", "max_iterations", c.kmeans.max_iterations);
    read_opt(pl, "placement", "restarts", c.kmeans.restarts);
    read_opt(pl, "placement", "freeze", c.freeze_placement);

    read_budget(section(root, "optimizer"), "optimizer", c.optimizer);

    const Json& nt = section(root, "net");
    check_keys(nt, "net",
               {"hidden", "learning_rate", "momentum", "fraction_weight", "minibatch", "iterations", "plateau"});
    c.net.hidden = read_list<std::size_t>(nt, "net", "hidden", c.net.hidden);
    read_opt(nt, "net", "learning_rate", c.net.learning_rate);
    read_opt(nt, "net", "momentum", c.net.momentum);
    read_opt(nt, "net", "fraction_weight", c.net.fraction_weight);
    read_opt(nt, "net", "minibatch", c.net.minibatch);
    read_opt(nt, "net", "iterations", c.net.iterations);
    read_opt(nt, "net", "plateau", c.net.plateau);

    static const AvgAllocSource sources[] = {AvgAllocSource::Register, AvgAllocSource::History};
    const Json& dn = section(root, "dnn");
    check_keys(dn, "dnn",
               {"pretrain_worlds", "pretrain_ues", "min_samples", "memory_capacity", "fine_tune_steps",
                "threshold_rule", "entropy_threshold", "incremental", "history_window", "norm_refresh_fraction",
                "avg_alloc"});
    DnnAreConfig& d = c.dnn;
    read_opt(dn, "dnn", "pretrain_worlds", d.pretrain_worlds);
    read_opt(dn, "dnn", "pretrain_ues", d.pretrain_ues);
    read_opt(dn, "dnn", "min_samples", d.min_samples);
    read_opt(dn, "dnn", "memory_capacity", d.memory_capacity);
    read_opt(dn, "dnn", "fine_tune_steps", d.fine_tune_steps);
    static const ThresholdRule rules[] = {ThresholdRule::Fixed, ThresholdRule::HalfMax, ThresholdRule::Calibrated};
    d.threshold_rule = read_enum(dn, "dnn", "threshold_rule", d.threshold_rule, rules);
    read_opt(dn, "dnn", "entropy_threshold", d.entropy_threshold);
    if (dn.contains("entropy_threshold") && !dn.contains("threshold_rule")) d.threshold_rule = ThresholdRule::Fixed;
    if (d.threshold_rule == ThresholdRule::Fixed && !(d.entropy_threshold > 0))
        throw ConfigError("config: field 'dnn.entropy_threshold' must be > 0");
    read_opt(dn, "dnn", "incremental", d.incremental);
    read_opt(dn, "dnn", "history_window", d.history_window);
    read_opt(dn, "dnn", "norm_refresh_fraction", d.norm_refresh_fraction);
    d.avg_alloc_source = read_enum(dn, "dnn", "avg_alloc", d.avg_alloc_source, sources);
    if (d.pretrain_worlds < 1) throw ConfigError("config: field 'dnn.pretrain_worlds' must be >= 1");
    if (d.memory_capacity < 1) throw ConfigError("config: field 'dnn.memory_capacity' must be >= 1");

    const Json& dr = section(root, "drl");
    check_keys(dr, "drl",
               {"buffer_capacity", "batch_size", "alpha", "epsilon", "refinement", "refine", "explore_prob",
                "explore_candidates", "history_window", "norm_warmup_worlds", "norm_warmup_ues", "avg_alloc"});
    DrlAreConfig& r = c.drl;
    read_opt(dr, "drl", "buffer_capacity", r.buffer_capacity);
    read_opt(dr, "drl", "batch_size", r.batch_size);
    read_opt(dr, "drl", "alpha", r.alpha);
    read_opt(dr, "drl", "epsilon", r.epsilon);
    read_opt(dr, "drl", "refinement", r.refinement);
    read_budget(section(dr, "refine"), "drl.refine", r.budget);
    read_opt(dr, "drl", "explore_prob", r.explore_prob);
    read_opt(dr, "drl", "explore_candidates", r.explore_candidates);
    read_opt(dr, "drl", "history_window", r.history_window);
    read_opt(dr, "drl", "norm_warmup_worlds", r.norm_warmup_worlds);
    read_opt(dr, "drl", "norm_warmup_ues", r.norm_warmup_ues);
    r.avg_alloc_source = read_enum(dr, "drl", "avg_alloc", r.avg_alloc_source, sources);
    if (r.buffer_capacity < 1) throw ConfigError("config: field 'drl.buffer_capacity' must be >= 1");
    if (!(r.epsilon > 0)) throw ConfigError("config: field 'drl.epsilon' must be > 0");

    const Json& ex = section(root, "experiment");
    check_keys(ex, "experiment", {"seed", "horizon", "ue_start", "ue_end", "schedulers", "score_window", "timing"});
    ExperimentConfig& e = c.experiment;
    read_opt(ex, "experiment", "seed", e.seed);
    read_opt(ex, "experiment", "horizon", e.horizon);
    read_opt(ex, "experiment", "ue_start", e.ue_start);
    e.ue_end = e.ue_start;
    read_opt(ex, "experiment", "ue_end", e.ue_end);
    e.schedulers = read_schedulers(ex, "experiment", e.schedulers);
    read_opt(ex, "experiment", "score_window", e.score_window);
    read_opt(ex, "experiment", "timing", e.timing);
    if (e.horizon < 1) throw ConfigError("config: field 'experiment.horizon' must be >= 1");

    const Json& sw = section(root, "sweep");
    check_keys(sw, "sweep", {"ue_counts", "schedulers", "seeds"});
    c.sweep.ue_counts = read_list<std::size_t>(sw, "sweep", "ue_counts", c.sweep.ue_counts);
    for (auto n : c.sweep.ue_counts)
        if (n < 1) throw ConfigError("config: field 'sweep.ue_counts' entries must be >= 1");
    c.sweep.schedulers = read_schedulers(sw, "sweep", c.sweep.schedulers);
    c.sweep.seeds = read_list<std::uint64_t>(sw, "sweep", "seeds", c.sweep.seeds);

    const Json& ab = section(root, "ablation");
    check_keys(ab, "ablation", {"mode", "horizon", "dnn_ue_start", "dnn_ue_end", "drl_ues"});
    static const AblationMode modes[] = {AblationMode::DnnNoIncremental, AblationMode::DrlNoRefinement};
    c.ablation.mode = read_enum(ab, "ablation", "mode", c.ablation.mode, modes);
    read_opt(ab, "ablation", "horizon", c.ablation.horizon);
    read_opt(ab, "ablation", "dnn_ue_start", c.ablation.dnn_ue_start);
    read_opt(ab, "ablation", "dnn_ue_end", c.ablation.dnn_ue_end);
    read_opt(ab, "ablation", "drl_ues", c.ablation.drl_ues);

    try {
        c.optimizer.validate();
        c.drl.budget.validate();
        NetConfig probe = c.net;
        probe.validate();
    } catch (const std::invalid_argument& ex2) {
        throw ConfigError(std::string("config: ") + ex2.what());
    }
    return c;
}

/// Fully resolved config, every default spelled out. Feeding this back to
/// config_from_json reproduces the same Config.
inline Json config_to_json(const Config& c) {
    using detail::to_string;
    using hmec::to_string;
    const Scenario& s = c.scenario;
    Json nodes = Json::array();
    for (const auto& n : c.nodes) {
        Json j = {{"kind", to_string(n.kind)},
                  {"position", {n.position.x, n.position.y}},
                  {"capacity_cps", n.capacity_cps},
                  {"altitude_m", n.altitude_m}};
        if (std::isfinite(n.coverage_radius_m)) j["coverage_radius_m"] = n.coverage_radius_m;
        nodes.push_back(j);
    }
    auto scheds = [](const std::vector<SchedulerKind>& v) {
        Json a = Json::array();
        for (auto k : v) a.push_back(to_string(k));
        return a;
    };
    Json drl_refine = detail::budget_json(c.drl.budget);
    return {
        {"scenario",
         {{"zone_width", s.zone_width},
          {"zone_height", s.zone_height},
          {"epoch_seconds", s.epoch_seconds},
          {"bandwidth_hz", s.bandwidth_hz},
          {"tx_power_watts", s.tx_power_watts},
          {"noise_watts", s.noise_watts},
          {"road", {s.road.a, s.road.b, s.road.c}},
          {"ue_max_speed", s.ue_max_speed},
          {"ue_local_capacity_cps", s.ue_local_capacity_cps},
          {"uav_altitude_m", s.uav_altitude_m},
          {"channel",
           {{"ref_gain", s.channel.ref_gain},
            {"exponent_air", s.channel.exponent_air},
            {"exponent_ground", s.channel.exponent_ground},
            {"rayleigh", s.channel.rayleigh}}},
          {"tasks",
           {{"cycles_min", s.tasks.cycles_min},
            {"cycles_max", s.tasks.cycles_max},
            {"bits_min", s.tasks.bits_min},
            {"bits_max", s.tasks.bits_max},
            {"weight", s.tasks.weight}}},
          {"task_churn", s.churn == TaskChurn::PerEpoch ? "per_epoch" : "fixed"}}},
        {"nodes", nodes},
        {"placement",
         {{"max_iterations", c.kmeans.max_iterations}, {"restarts", c.kmeans.restarts}, {"freeze", c.freeze_placement}}},
        {"optimizer", detail::budget_json(c.optimizer)},
        {"net",
         {{"hidden", c.net.hidden},
          {"learning_rate", c.net.learning_rate},
          {"momentum", c.net.momentum},
          {"fraction_weight", c.net.fraction_weight},
          {"minibatch", c.net.minibatch},
          {"iterations", c.net.iterations},
          {"plateau", c.net.plateau}}},
        {"dnn",
         {{"pretrain_worlds", c.dnn.pretrain_worlds},
          {"pretrain_ues", c.dnn.pretrain_ues},
          {"min_samples", c.dnn.min_samples},
          {"memory_capacity", c.dnn.memory_capacity},
          {"fine_tune_steps", c.dnn.fine_tune_steps},
          {"threshold_rule", to_string(c.dnn.threshold_rule)},
          {"entropy_threshold", c.dnn.entropy_threshold},
          {"incremental", c.dnn.incremental},
          {"history_window", c.dnn.history_window},
          {"norm_refresh_fraction", c.dnn.norm_refresh_fraction},
          {"avg_alloc", to_string(c.dnn.avg_alloc_source)}}},
        {"drl",
         {{"buffer_capacity", c.drl.buffer_capacity},
          {"batch_size", c.drl.batch_size},
          {"alpha", c.drl.alpha},
          {"epsilon", c.drl.epsilon},
          {"refinement", c.drl.refinement},
          {"refine", drl_refine},
          {"explore_prob", c.drl.explore_prob},
          {"explore_candidates", c.drl.explore_candidates},
          {"history_window", c.drl.history_window},
          {"norm_warmup_worlds", c.drl.norm_warmup_worlds},
          {"norm_warmup_ues", c.drl.norm_warmup_ues},
          {"avg_alloc", to_string(c.drl.avg_alloc_source)}}},
        {"experiment",
         {{"seed", c.experiment.seed},
          {"horizon", c.experiment.horizon},
          {"ue_start", c.experiment.ue_start},
          {"ue_end", c.experiment.ue_end},
          {"schedulers", scheds(c.experiment.schedulers)},
          {"score_window", c.experiment.score_window},
          {"timing", c.experiment.timing}}},
        {"sweep",
         {{"ue_counts", c.sweep.ue_counts}, {"schedulers", scheds(c.sweep.schedulers)}, {"seeds", c.sweep.seeds}}},
        {"ablation",
         {{"mode", to_string(c.ablation.mode)},
          {"horizon", c.ablation.horizon},
          {"dnn_ue_start", c.ablation.dnn_ue_start},
          {"dnn_ue_end", c.ablation.dnn_ue_end},
          {"drl_ues", c.ablation.drl_ues}}},
    };
}

/// FNV-1a 64 over the canonical dump of the resolved config, as 16 hex digits.
inline std::string config_hash(const Config& c) {
    const std::string text = config_to_json(c).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Presets

/// Desk scale: GS at the zone center region, one GV, two UAVs, N=10.
inline Json preset_json(const std::string& name) {
    Json desk = {
        {"scenario", {{"zone_width", 50.0}, {"zone_height", 50.0}}},
        {"nodes",
         Json::array({{{"kind", "GS"}, {"position", {25.0, 25.0}}, {"capacity_cps", 50e9}},
                      {{"kind", "GV"}, {"capacity_cps", 30e9}},
                      {{"kind", "UAV"}, {"capacity_cps", 15e9}, {"coverage_radius_m", 25.0}},
                      {{"kind", "UAV"}, {"capacity_cps", 15e9}, {"coverage_radius_m", 25.0}}})},
    };
    if (name == "desk") return desk;
    Json paper = desk;
    paper["experiment"] = {{"ue_start", 50}, {"ue_end", 50}};
    paper["drl"] = {{"buffer_capacity", 10000}, {"batch_size", 1000}};
    paper["net"] = {{"hidden", {64, 32}}};
    if (name == "paper") return paper;
    if (name == "paper-matlab") {
        paper["net"]["learning_rate"] = 1.5;
        return paper;
    }
    throw ConfigError("config: unknown preset '" + name + "' (desk, paper, paper-matlab)");
}

/// Parses JSON text; syntax errors report line and column.
inline Json parse_config_text(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        std::string what = e.what();
        throw ConfigError("config: parse error at " + detail::locate(text, e.byte ? e.byte - 1 : 0) + ": " + what);
    }
}

inline Json read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// Preset (if any) overlaid with the file (if any), RFC 7386 merge patch.
inline Config load_config(const std::string& path, const std::string& preset = "") {
    Json doc = preset.empty() ? Json::object() : preset_json(preset);
    if (!path.empty()) doc.merge_patch(read_config_file(path));
    return config_from_json(doc);
}

} // namespace hmec
