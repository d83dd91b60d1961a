#include "specshare/configio.hpp"

#include <cmath>
#include <fstream>

namespace specshare {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError("config error at " + path + ": " + msg);
}

const json& member(const json& j, const std::string& path, const char* key) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(path + "." + key, "missing required field");
    return *it;
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "must be finite");
    return v;
}

std::size_t as_count(const json& j, const std::string& path) {
    if (!j.is_number_integer() || (!j.is_number_unsigned() && j.get<long long>() < 0))
        fail(path, "expected a nonnegative integer");
    return j.get<std::size_t>();
}

std::uint64_t as_seed(const json& j, const std::string& path) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        fail(path, "expected a nonnegative integer");
    return j.get<std::uint64_t>();
}

std::vector<double> as_vector(const json& j, const std::string& path, std::size_t want = 0) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    if (want && j.size() != want)
        fail(path, "expected " + std::to_string(want) + " entries, got " +
                       std::to_string(j.size()));
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<std::size_t> as_indices(const json& j, const std::string& path, std::size_t bound) {
    if (!j.is_array()) fail(path, "expected an array of user indices");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        std::size_t v = as_count(j[i], p);
        if (v >= bound) fail(p, "user index out of range");
        out.push_back(v);
    }
    return out;
}

NetworkConfig parse_network(const json& j) {
    const std::string P = "network";
    NetworkConfig net;
    net.n_users = as_count(member(j, P, "n_users"), P + ".n_users");
    net.n_sub = as_count(member(j, P, "n_sub"), P + ".n_sub");
    if (net.n_users == 0 || net.n_sub == 0) fail(P, "n_users and n_sub must be >= 1");
    net.pus = as_indices(member(j, P, "pus"), P + ".pus", net.n_users);
    net.sus = as_indices(member(j, P, "sus"), P + ".sus", net.n_users);
    net.budgets = as_vector(member(j, P, "budgets"), P + ".budgets", net.n_users);
    for (std::size_t i = 0; i < net.budgets.size(); ++i)
        if (!(net.budgets[i] >= 0.0))
            fail(P + ".budgets[" + std::to_string(i) + "]", "budget must be nonnegative");
    const json& noise = member(j, P, "noise");
    if (!noise.is_array() || noise.size() != net.n_users)
        fail(P + ".noise", "expected one row per user");
    for (std::size_t i = 0; i < net.n_users; ++i)
        net.noise.push_back(
            as_vector(noise[i], P + ".noise[" + std::to_string(i) + "]", net.n_sub));
    net.rho = as_number(member(j, P, "rho"), P + ".rho");
    try {
        net.validate();
    } catch (const std::exception& e) {
        fail(P, e.what());
    }
    return net;
}

GainTensor parse_gains(const json& j, const NetworkConfig& net) {
    const std::string P = "gains";
    if (!j.is_array() || j.size() != net.n_users) fail(P, "expected one row per transmitter");
    GainTensor g(net.n_users, net.n_sub);
    for (std::size_t i = 0; i < net.n_users; ++i) {
        const std::string Pi = P + "[" + std::to_string(i) + "]";
        if (!j[i].is_array() || j[i].size() != net.n_users)
            fail(Pi, "expected one entry per receiver");
        for (std::size_t k = 0; k < net.n_users; ++k) {
            auto row = as_vector(j[i][k], Pi + "[" + std::to_string(k) + "]", net.n_sub);
            for (std::size_t f = 0; f < net.n_sub; ++f) {
                if (!(row[f] >= 0.0))
                    fail(Pi + "[" + std::to_string(k) + "][" + std::to_string(f) + "]",
                         "gain must be nonnegative");
                g.at(i, k, f) = row[f];
            }
        }
    }
    return g;
}

ChannelModel parse_channel(const json& j, const NetworkConfig& net) {
    const std::string P = "channel";
    const json& kj = member(j, P, "kind");
    if (!kj.is_string()) fail(P + ".kind", "expected a string");
    std::string kind = kj.get<std::string>();
    ChannelModel m;
    if (kind == "variance") {
        m = ChannelModel::variance_spec(net.n_users, net.n_sub);
    } else if (kind == "pathloss") {
        double alpha = j.contains("alpha") ? as_number(j["alpha"], P + ".alpha") : 2.0;
        double area = j.contains("area") ? as_number(j["area"], P + ".area") : 10.0;
        m = ChannelModel::path_loss(net.n_users, net.n_sub, alpha, area);
    } else {
        fail(P + ".kind", "expected \"variance\" or \"pathloss\"");
    }
    if (j.contains("variances")) {
        const json& v = j["variances"];
        if (!v.is_array() || v.size() != net.n_users)
            fail(P + ".variances", "expected one row per transmitter");
        for (std::size_t i = 0; i < net.n_users; ++i) {
            const std::string Pi = P + ".variances[" + std::to_string(i) + "]";
            if (!v[i].is_array() || v[i].size() != net.n_users)
                fail(Pi, "expected one entry per receiver");
            for (std::size_t k = 0; k < net.n_users; ++k)
                m.set_pair(i, k, as_vector(v[i][k], Pi + "[" + std::to_string(k) + "]",
                                           net.n_sub));
        }
    } else if (kind == "variance") {
        fail(P + ".variances", "missing required field");
    }
    if (j.contains("links")) {
        const json& ls = j["links"];
        if (!ls.is_array()) fail(P + ".links", "expected an array");
        for (std::size_t i = 0; i < ls.size(); ++i) {
            const std::string Pi = P + ".links[" + std::to_string(i) + "]";
            GainLink l;
            auto t = as_indices(member(ls[i], Pi, "target"), Pi + ".target", net.n_users);
            auto s = as_indices(member(ls[i], Pi, "source"), Pi + ".source", net.n_users);
            if (t.size() != 2 || s.size() != 2)
                fail(Pi, "target and source must be [tx, rx] pairs");
            l.target_tx = t[0];
            l.target_rx = t[1];
            l.source_tx = s[0];
            l.source_rx = s[1];
            l.scale = ls[i].contains("scale") ? as_number(ls[i]["scale"], Pi + ".scale") : 1.0;
            m.links.push_back(l);
        }
    }
    try {
        m.validate();
    } catch (const std::exception& e) {
        fail(P, e.what());
    }
    return m;
}

IterationSchedule parse_schedule(const json& j) {
    const std::string P = "schedule";
    IterationSchedule s;
    if (j.contains("eta")) s.eta = as_number(j["eta"], P + ".eta");
    if (j.contains("delta")) s.delta = as_number(j["delta"], P + ".delta");
    if (j.contains("eta_per_pu")) s.eta_per_pu = as_vector(j["eta_per_pu"], P + ".eta_per_pu");
    if (j.contains("inner_iters")) s.inner_iters = as_count(j["inner_iters"], P + ".inner_iters");
    if (j.contains("tau_factor")) s.tau_factor = as_count(j["tau_factor"], P + ".tau_factor");
    if (j.contains("max_outer")) s.max_outer = as_count(j["max_outer"], P + ".max_outer");
    if (j.contains("pu_inner_cap"))
        s.pu_inner_cap = as_count(j["pu_inner_cap"], P + ".pu_inner_cap");
    if (j.contains("tol")) s.tol = as_number(j["tol"], P + ".tol");
    if (j.contains("window_len")) s.window_len = as_count(j["window_len"], P + ".window_len");
    try {
        s.validate();
    } catch (const std::exception& e) {
        fail(P, e.what());
    }
    return s;
}

SearchSpec parse_search(const json& j) {
    const std::string P = "search";
    SearchSpec s;
    if (j.contains("restarts")) s.restarts = as_count(j["restarts"], P + ".restarts");
    if (j.contains("initial_step_frac"))
        s.initial_step_frac = as_number(j["initial_step_frac"], P + ".initial_step_frac");
    if (j.contains("step_floor")) s.step_floor = as_number(j["step_floor"], P + ".step_floor");
    if (j.contains("grid_points")) s.grid_points = as_count(j["grid_points"], P + ".grid_points");
    if (s.restarts == 0) fail(P + ".restarts", "must be >= 1");
    if (!(s.initial_step_frac > 0.0)) fail(P + ".initial_step_frac", "must be positive");
    if (!(s.step_floor > 0.0)) fail(P + ".step_floor", "must be positive");
    if (s.grid_points == 0) fail(P + ".grid_points", "must be >= 1");
    return s;
}

}  // namespace

LoadedConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config error: top level must be an object");
    if (!doc.contains("schema")) throw ConfigError("config error at schema: missing field");
    if (!doc["schema"].is_number_integer() || doc["schema"].get<int>() != kSchemaVersion)
        fail("schema", "unsupported schema version (expected 1)");

    LoadedConfig cfg;
    cfg.network = parse_network(member(doc, "(top level)", "network"));

    bool has_gains = doc.contains("gains"), has_channel = doc.contains("channel");
    if (has_gains == has_channel)
        throw ConfigError("config error: provide exactly one of \"gains\" or \"channel\"");
    if (has_gains) cfg.gains = parse_gains(doc["gains"], cfg.network);
    if (has_channel) cfg.channel = parse_channel(doc["channel"], cfg.network);

    if (doc.contains("realizations"))
        cfg.realizations = as_count(doc["realizations"], "realizations");
    if (cfg.realizations == 0) fail("realizations", "must be >= 1");
    if (doc.contains("seed")) cfg.seed = as_seed(doc["seed"], "seed");

    if (doc.contains("init_p1")) {
        const json& ip = doc["init_p1"];
        if (ip.is_string()) {
            std::string s = ip.get<std::string>();
            if (s == "waterfill") cfg.init = InitPolicy::Waterfill;
            else if (s == "zeros") cfg.init = InitPolicy::Zeros;
            else fail("init_p1", "expected \"waterfill\", \"zeros\", or an array");
        } else {
            cfg.init = InitPolicy::Given;
            cfg.init_p1 = as_vector(ip, "init_p1", cfg.network.n_sub);
            for (std::size_t f = 0; f < cfg.init_p1.size(); ++f)
                if (!(cfg.init_p1[f] >= 0.0))
                    fail("init_p1[" + std::to_string(f) + "]", "must be nonnegative");
        }
    }

    if (doc.contains("schedule")) cfg.schedule = parse_schedule(doc["schedule"]);
    if (doc.contains("search")) cfg.search = parse_search(doc["search"]);

    if (doc.contains("ne")) {
        const json& ne = doc["ne"];
        const std::string P = "ne";
        if (ne.contains("tol")) cfg.ne_tol = as_number(ne["tol"], P + ".tol");
        if (!(cfg.ne_tol > 0.0)) fail(P + ".tol", "must be positive");
        if (ne.contains("max_sweeps")) cfg.ne_sweeps = as_count(ne["max_sweeps"], P + ".max_sweeps");
        if (cfg.ne_sweeps == 0) fail(P + ".max_sweeps", "must be >= 1");
        if (ne.contains("order")) {
            std::string o = ne["order"].is_string() ? ne["order"].get<std::string>() : "";
            if (o == "simultaneous") cfg.ne_order = SweepOrder::Simultaneous;
            else if (o == "sequential") cfg.ne_order = SweepOrder::Sequential;
            else fail(P + ".order", "expected \"simultaneous\" or \"sequential\"");
        }
    }
    if (doc.contains("curve_cap")) cfg.curve_cap = as_count(doc["curve_cap"], "curve_cap");
    return cfg;
}

LoadedConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config error: cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError("config error: " + path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

json config_to_json(const LoadedConfig& cfg) {
    json doc;
    doc["schema"] = kSchemaVersion;
    json net;
    net["n_users"] = cfg.network.n_users;
    net["n_sub"] = cfg.network.n_sub;
    net["pus"] = cfg.network.pus;
    net["sus"] = cfg.network.sus;
    net["budgets"] = cfg.network.budgets;
    net["noise"] = cfg.network.noise;
    net["rho"] = cfg.network.rho;
    doc["network"] = net;

    if (cfg.gains) {
        json rows = json::array();
        for (std::size_t i = 0; i < cfg.network.n_users; ++i) {
            json cols = json::array();
            for (std::size_t k = 0; k < cfg.network.n_users; ++k) {
                json sub = json::array();
                for (std::size_t f = 0; f < cfg.network.n_sub; ++f)
                    sub.push_back(cfg.gains->at(i, k, f));
                cols.push_back(sub);
            }
            rows.push_back(cols);
        }
        doc["gains"] = rows;
    }
    if (cfg.channel) {
        const ChannelModel& m = *cfg.channel;
        json ch;
        ch["kind"] = m.kind == ChannelKind::PathLoss ? "pathloss" : "variance";
        if (m.kind == ChannelKind::PathLoss) {
            ch["alpha"] = m.alpha;
            ch["area"] = m.area;
        }
        json rows = json::array();
        for (std::size_t i = 0; i < m.n_users; ++i) {
            json cols = json::array();
            for (std::size_t k = 0; k < m.n_users; ++k) {
                json sub = json::array();
                for (std::size_t f = 0; f < m.n_sub; ++f) sub.push_back(m.var(i, k, f));
                cols.push_back(sub);
            }
            rows.push_back(cols);
        }
        ch["variances"] = rows;
        if (!m.links.empty()) {
            json ls = json::array();
            for (const GainLink& l : m.links) {
                json e;
                e["target"] = {l.target_tx, l.target_rx};
                e["source"] = {l.source_tx, l.source_rx};
                e["scale"] = l.scale;
                ls.push_back(e);
            }
            ch["links"] = ls;
        }
        doc["channel"] = ch;
    }

    doc["realizations"] = cfg.realizations;
    doc["seed"] = cfg.seed;
    if (cfg.init == InitPolicy::Given) doc["init_p1"] = cfg.init_p1;
    else doc["init_p1"] = cfg.init == InitPolicy::Waterfill ? "waterfill" : "zeros";

    json sch;
    sch["eta"] = cfg.schedule.eta;
    sch["delta"] = cfg.schedule.delta;
    if (!cfg.schedule.eta_per_pu.empty()) sch["eta_per_pu"] = cfg.schedule.eta_per_pu;
    sch["inner_iters"] = cfg.schedule.inner_iters;
    sch["tau_factor"] = cfg.schedule.tau_factor;
    sch["max_outer"] = cfg.schedule.max_outer;
    sch["pu_inner_cap"] = cfg.schedule.pu_inner_cap;
    sch["tol"] = cfg.schedule.tol;
    sch["window_len"] = cfg.schedule.window_len;
    doc["schedule"] = sch;

    json se;
    se["restarts"] = cfg.search.restarts;
    se["initial_step_frac"] = cfg.search.initial_step_frac;
    se["step_floor"] = cfg.search.step_floor;
    se["grid_points"] = cfg.search.grid_points;
    doc["search"] = se;

    json ne;
    ne["tol"] = cfg.ne_tol;
    ne["max_sweeps"] = cfg.ne_sweeps;
    ne["order"] = cfg.ne_order == SweepOrder::Sequential ? "sequential" : "simultaneous";
    doc["ne"] = ne;

    doc["curve_cap"] = cfg.curve_cap;
    return doc;
}

ExperimentSpec make_experiment(const LoadedConfig& cfg, AlgorithmKind algorithm) {
    if (!cfg.channel)
        throw ConfigError("config error: an ensemble run needs a \"channel\" block");
    ExperimentSpec spec;
    spec.config = cfg.network;
    spec.channel = *cfg.channel;
    spec.realizations = cfg.realizations;
    spec.seed = cfg.seed;
    spec.algorithm = algorithm;
    spec.schedule = cfg.schedule;
    spec.search = cfg.search;
    spec.init = cfg.init;
    spec.init_p1 = cfg.init_p1;
    spec.ne_tol = cfg.ne_tol;
    spec.ne_sweeps = cfg.ne_sweeps;
    spec.ne_order = cfg.ne_order;
    spec.curve_cap = cfg.curve_cap;
    return spec;
}

}  // namespace specshare
