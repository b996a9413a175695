#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpt/common.hpp"
#include "cpt/dual.hpp"
#include "cpt/baseline.hpp"
#include "cpt/sca.hpp"
#include "cpt/scenario.hpp"

namespace cpt {

using json = nlohmann::json;

// Shortest representation that parses back to the identical double.
inline std::string fmt_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f << content;
    if (!f) throw IoError("write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// --- PWF ---

inline json pwf_to_json(const Pwf& w) {
    return json{{"kind", w.kind == PwfKind::Identity ? "identity" : "tversky_kahneman"},
                {"delta", w.delta}};
}

inline Pwf pwf_from_json(const json& j) {
    Pwf w;
    if (j.contains("kind")) {
        const std::string k = j.at("kind").get<std::string>();
        if (k == "identity")
            w.kind = PwfKind::Identity;
        else if (k == "tversky_kahneman")
            w.kind = PwfKind::TverskyKahneman;
        else
            throw BadSpec("unknown pwf kind '" + k + "'");
    }
    if (j.contains("delta")) w.delta = j.at("delta").get<double>();
    return w;
}

// --- instance files ---

inline json problem_to_json(const AllocationProblem& pr) {
    json agents = json::array();
    for (const Agent& a : pr.agents) {
        const CptParams& p = a.params;
        agents.push_back(json{{"alpha", p.alpha},
                              {"beta", p.beta},
                              {"lambda1", p.lambda1},
                              {"lambda2", p.lambda2},
                              {"gamma1", p.gamma1},
                              {"gamma2", p.gamma2},
                              {"mu1", p.mu1},
                              {"mu2", p.mu2},
                              {"m", p.m},
                              {"n", p.n},
                              {"x0", p.x0},
                              {"gain", a.gain},
                              {"prob", a.prob}});
    }
    return json{{"p_total", pr.p_total},
                {"noise_var", pr.noise_var},
                {"pwf", pwf_to_json(pr.pwf)},
                {"agents", agents}};
}

inline AllocationProblem problem_from_json(const json& j) {
    AllocationProblem pr;
    pr.p_total = j.at("p_total").get<double>();
    pr.noise_var = j.at("noise_var").get<double>();
    if (j.contains("pwf")) pr.pwf = pwf_from_json(j.at("pwf"));
    for (const json& ja : j.at("agents")) {
        Agent a;
        CptParams& p = a.params;
        p.alpha = ja.at("alpha").get<double>();
        p.beta = ja.at("beta").get<double>();
        p.lambda1 = ja.at("lambda1").get<double>();
        p.lambda2 = ja.at("lambda2").get<double>();
        p.gamma1 = ja.at("gamma1").get<double>();
        p.gamma2 = ja.at("gamma2").get<double>();
        p.mu1 = ja.at("mu1").get<double>();
        p.mu2 = ja.at("mu2").get<double>();
        p.m = ja.at("m").get<double>();
        p.n = ja.at("n").get<double>();
        p.x0 = ja.at("x0").get<double>();
        a.gain = ja.at("gain").get<double>();
        a.prob = ja.contains("prob") ? ja.at("prob").get<double>() : 1.0;
        pr.agents.push_back(a);
    }
    pr.validate();
    return pr;
}

inline void save_problem(const AllocationProblem& pr, const std::filesystem::path& path) {
    write_text_file(path, problem_to_json(pr).dump(2) + "\n");
}

inline AllocationProblem load_problem(const std::filesystem::path& path) {
    return problem_from_json(json::parse(read_text_file(path)));
}

// --- run configuration ---

enum class BaselineKind { Multistart, Grid };

struct BatchConfig {
    std::vector<std::size_t> n_list{10, 30, 50};
    std::size_t instances_per_n = 500;
    std::uint64_t base_seed = 1;
    BaselineKind baseline = BaselineKind::Multistart;
};

struct ContourConfig {
    std::size_t resolution = 101;
};

struct VerifyConfig {
    std::size_t count = 200;
    std::uint64_t seed = 7;
    std::size_t grid_points = 200;
    std::vector<ParamSampler> samplers{ParamSampler::SShaped, ParamSampler::Concave,
                                       ParamSampler::Mixed};
};

struct RunConfig {
    ScenarioSpec scenario;
    std::string instance_path;  // when nonempty, overrides the scenario
    Vec init;                   // empty means equal split
    ScaConfig sca;
    DualConfig dual;
    OracleConfig oracle;
    BatchConfig batch;
    ContourConfig contour;
    VerifyConfig verify;
};

inline ScenarioSpec scenario_from_json(const json& j) {
    ScenarioSpec s;
    if (j.contains("n_agents")) s.n_agents = j.at("n_agents").get<std::size_t>();
    if (j.contains("mean_snr_db")) s.mean_snr_db = j.at("mean_snr_db").get<double>();
    if (j.contains("p_total")) s.p_total = j.at("p_total").get<double>();
    if (j.contains("sampler")) s.sampler = sampler_from_name(j.at("sampler").get<std::string>());
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("prob")) s.prob = j.at("prob").get<double>();
    if (j.contains("pwf")) s.pwf = pwf_from_json(j.at("pwf"));
    s.validate();
    return s;
}

inline json scenario_to_json(const ScenarioSpec& s) {
    return json{{"n_agents", s.n_agents},   {"mean_snr_db", s.mean_snr_db},
                {"p_total", s.p_total},     {"sampler", sampler_name(s.sampler)},
                {"seed", s.seed},           {"prob", s.prob},
                {"pwf", pwf_to_json(s.pwf)}};
}

inline ThetaSchedule theta_from_json(const json& j) {
    ThetaSchedule t;
    if (j.contains("kind")) {
        const std::string k = j.at("kind").get<std::string>();
        if (k == "harmonic")
            t.kind = ThetaKind::Harmonic;
        else if (k == "power")
            t.kind = ThetaKind::Power;
        else if (k == "constant1")
            t.kind = ThetaKind::Constant1;
        else
            throw BadSpec("unknown theta kind '" + k + "'");
    }
    if (j.contains("theta0")) t.theta0 = j.at("theta0").get<double>();
    if (j.contains("param")) t.param = j.at("param").get<double>();
    t.validate();
    return t;
}

inline RunConfig config_from_json(const json& j) {
    RunConfig c;
    if (j.contains("scenario")) c.scenario = scenario_from_json(j.at("scenario"));
    if (j.contains("instance_path")) c.instance_path = j.at("instance_path").get<std::string>();
    if (j.contains("init") && j.at("init").is_array())
        c.init = j.at("init").get<Vec>();

    if (j.contains("sca")) {
        const json& js = j.at("sca");
        if (js.contains("theta")) c.sca.theta_schedule = theta_from_json(js.at("theta"));
        if (js.contains("max_outer_iters"))
            c.sca.max_outer_iters = js.at("max_outer_iters").get<std::size_t>();
        if (js.contains("x_tol")) c.sca.x_tol = js.at("x_tol").get<double>();
        if (js.contains("f_tol")) c.sca.f_tol = js.at("f_tol").get<double>();
        if (js.contains("monotone")) c.sca.monotone_mode = js.at("monotone").get<bool>();
    }
    if (j.contains("surrogate")) {
        const json& js = j.at("surrogate");
        if (js.contains("eps_curv")) c.sca.surrogate.eps_curv = js.at("eps_curv").get<double>();
        if (js.contains("prox_tau")) c.sca.surrogate.prox_tau = js.at("prox_tau").get<double>();
    }
    if (j.contains("dual")) {
        const json& jd = j.at("dual");
        if (jd.contains("zeta0")) c.dual.zeta.c = jd.at("zeta0").get<double>();
        if (jd.contains("zeta_exponent")) c.dual.zeta.exponent = jd.at("zeta_exponent").get<double>();
        if (jd.contains("eta0") && !jd.at("eta0").is_null())
            c.dual.eta.c = jd.at("eta0").get<double>();
        if (jd.contains("eta_exponent")) c.dual.eta.exponent = jd.at("eta_exponent").get<double>();
        if (jd.contains("k_init")) c.dual.k_init = jd.at("k_init").get<double>();
        if (jd.contains("max_dual_iters"))
            c.dual.max_dual_iters = jd.at("max_dual_iters").get<std::size_t>();
        if (jd.contains("max_primal_iters"))
            c.dual.max_primal_iters = jd.at("max_primal_iters").get<std::size_t>();
        if (jd.contains("gap_tol")) c.dual.gap_tol = jd.at("gap_tol").get<double>();
        if (jd.contains("feas_tol")) c.dual.feas_tol = jd.at("feas_tol").get<double>();
        c.dual.zeta.validate();
        if (!std::isnan(c.dual.eta.c)) c.dual.eta.validate();
    }
    if (j.contains("oracle")) {
        const json& jo = j.at("oracle");
        if (jo.contains("grid_points_per_axis"))
            c.oracle.grid_points_per_axis = jo.at("grid_points_per_axis").get<std::size_t>();
        if (jo.contains("n_starts")) c.oracle.n_starts = jo.at("n_starts").get<std::size_t>();
        if (jo.contains("start_seed")) c.oracle.start_seed = jo.at("start_seed").get<std::uint64_t>();
        if (jo.contains("local_tol")) c.oracle.local_tol = jo.at("local_tol").get<double>();
        if (jo.contains("max_local_iters"))
            c.oracle.max_local_iters = jo.at("max_local_iters").get<std::size_t>();
    }
    if (j.contains("batch")) {
        const json& jb = j.at("batch");
        if (jb.contains("n_list")) c.batch.n_list = jb.at("n_list").get<std::vector<std::size_t>>();
        if (jb.contains("instances_per_n"))
            c.batch.instances_per_n = jb.at("instances_per_n").get<std::size_t>();
        if (jb.contains("base_seed")) c.batch.base_seed = jb.at("base_seed").get<std::uint64_t>();
        if (jb.contains("baseline")) {
            const std::string b = jb.at("baseline").get<std::string>();
            if (b == "multistart")
                c.batch.baseline = BaselineKind::Multistart;
            else if (b == "grid")
                c.batch.baseline = BaselineKind::Grid;
            else
                throw BadSpec("unknown baseline '" + b + "'");
        }
    }
    if (j.contains("contour")) {
        const json& jc = j.at("contour");
        if (jc.contains("resolution")) c.contour.resolution = jc.at("resolution").get<std::size_t>();
        if (c.contour.resolution < 2) throw BadSpec("contour resolution must be at least 2");
    }
    if (j.contains("verify")) {
        const json& jv = j.at("verify");
        if (jv.contains("count")) c.verify.count = jv.at("count").get<std::size_t>();
        if (jv.contains("seed")) c.verify.seed = jv.at("seed").get<std::uint64_t>();
        if (jv.contains("grid_points"))
            c.verify.grid_points = jv.at("grid_points").get<std::size_t>();
        if (jv.contains("samplers")) {
            c.verify.samplers.clear();
            for (const json& s : jv.at("samplers"))
                c.verify.samplers.push_back(sampler_from_name(s.get<std::string>()));
        }
    }
    return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw IoError("config parse error in " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

// Canonical dump used for the sidecar hash: nlohmann objects are key-sorted,
// so equal configs hash equally.
inline std::string config_hash(const json& j) { return hex64(fnv1a64(j.dump())); }

// --- CSV ---

class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) out_ += ',';
            out_ += header[i];
        }
        out_ += '\n';
        cols_ = header.size();
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ += ',';
            out_ += cells[i];
        }
        out_ += '\n';
    }

    const std::string& str() const { return out_; }
    std::size_t columns() const { return cols_; }

  private:
    std::string out_;
    std::size_t cols_ = 0;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw IoError("bad numeric field '" + s + "'");
    return v;
}

}  // namespace cpt
