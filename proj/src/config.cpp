#include "lasq/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace lasq {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& v, int line) {
    std::istringstream iss(v);
    T out;
    iss >> out;
    if (iss.fail() || !(iss >> std::ws).eof())
        throw ConfigError("line " + std::to_string(line) + ": bad numeric value '" + v + "'");
    return out;
}

bool parse_bool(const std::string& v, int line) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("line " + std::to_string(line) + ": bad boolean value '" + v + "'");
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    using Setter = std::function<void(RunConfig&, const std::string&, int)>;
    static const std::map<std::string, Setter> setters = {
        {"seed", [](RunConfig& c, const std::string& v, int l) { c.seed = parse_number<std::uint64_t>(v, l); }},
        {"lao.alpha", [](RunConfig& c, const std::string& v, int l) { c.lao_alpha = parse_number<double>(v, l); }},
        {"lao.eta", [](RunConfig& c, const std::string& v, int l) { c.lao_eta = parse_number<double>(v, l); }},
        {"lao.delta", [](RunConfig& c, const std::string& v, int l) { c.lao_delta = parse_number<double>(v, l); }},
        {"lao.y_only", [](RunConfig& c, const std::string& v, int l) { c.lao_y_only = parse_bool(v, l); }},
        {"gf.radius", [](RunConfig& c, const std::string& v, int l) { c.gf_radius = parse_number<int>(v, l); }},
        {"gf.eps", [](RunConfig& c, const std::string& v, int l) { c.gf_eps = parse_number<double>(v, l); }},
        {"sampler.sigma", [](RunConfig& c, const std::string& v, int l) { c.sampler_sigma = parse_number<double>(v, l); }},
        {"sampler.lambda", [](RunConfig& c, const std::string& v, int l) { c.sampler_lambda = parse_number<double>(v, l); }},
        {"sampler.levels", [](RunConfig& c, const std::string& v, int l) { c.sampler_levels = parse_number<int>(v, l); }},
        {"diffusion.T", [](RunConfig& c, const std::string& v, int l) { c.diffusion_t = parse_number<int>(v, l); }},
        {"diffusion.beta1", [](RunConfig& c, const std::string& v, int l) { c.diffusion_beta1 = parse_number<double>(v, l); }},
        {"diffusion.betaT", [](RunConfig& c, const std::string& v, int l) { c.diffusion_beta_t = parse_number<double>(v, l); }},
        {"diffusion.tau_max", [](RunConfig& c, const std::string& v, int l) { c.diffusion_tau_max = parse_number<double>(v, l); }},
        {"diffusion.lambda_d", [](RunConfig& c, const std::string& v, int l) { c.diffusion_lambda_d = parse_number<double>(v, l); }},
        {"diffusion.lambda_g", [](RunConfig& c, const std::string& v, int l) { c.diffusion_lambda_g = parse_number<double>(v, l); }},
        {"diffusion.psi_ceil", [](RunConfig& c, const std::string& v, int l) { c.diffusion_psi_ceil = parse_bool(v, l); }},
        {"encoder.k", [](RunConfig& c, const std::string& v, int l) { c.encoder_k = parse_number<int>(v, l); }},
        {"training.lr", [](RunConfig& c, const std::string& v, int l) { c.train_lr = parse_number<double>(v, l); }},
        {"training.steps", [](RunConfig& c, const std::string& v, int l) { c.train_steps = parse_number<int>(v, l); }},
    };

    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        const std::string s = trim(raw);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end())
            throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'");
        it->second(cfg, value, line);
    }
    validate_config(cfg);
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream out;
    out.precision(17);
    out << "seed = " << cfg.seed << "\n";
    out << "lao.alpha = " << cfg.lao_alpha << "\n";
    out << "lao.eta = " << cfg.lao_eta << "\n";
    out << "lao.delta = " << cfg.lao_delta << "\n";
    out << "lao.y_only = " << (cfg.lao_y_only ? "true" : "false") << "\n";
    out << "gf.radius = " << cfg.gf_radius << "\n";
    out << "gf.eps = " << cfg.gf_eps << "\n";
    out << "sampler.sigma = " << cfg.sampler_sigma << "\n";
    out << "sampler.lambda = " << cfg.sampler_lambda << "\n";
    out << "sampler.levels = " << cfg.sampler_levels << "\n";
    out << "diffusion.T = " << cfg.diffusion_t << "\n";
    out << "diffusion.beta1 = " << cfg.diffusion_beta1 << "\n";
    out << "diffusion.betaT = " << cfg.diffusion_beta_t << "\n";
    out << "diffusion.tau_max = " << cfg.diffusion_tau_max << "\n";
    out << "diffusion.lambda_d = " << cfg.diffusion_lambda_d << "\n";
    out << "diffusion.lambda_g = " << cfg.diffusion_lambda_g << "\n";
    out << "diffusion.psi_ceil = " << (cfg.diffusion_psi_ceil ? "true" : "false") << "\n";
    out << "encoder.k = " << cfg.encoder_k << "\n";
    out << "training.lr = " << cfg.train_lr << "\n";
    out << "training.steps = " << cfg.train_steps << "\n";
    return out.str();
}

void apply_env_seed(RunConfig& cfg) {
    if (const char* env = std::getenv("LASQ_SEED")) {
        try {
            cfg.seed = parse_number<std::uint64_t>(env, 0);
        } catch (const ConfigError&) {
            throw ConfigError(std::string("LASQ_SEED: bad value '") + env + "'");
        }
    }
}

void validate_config(const RunConfig& cfg) {
    auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
    if (!(cfg.lao_alpha > 0.0)) fail("lao.alpha must be > 0");
    if (cfg.lao_eta < 0.0) fail("lao.eta must be >= 0");
    if (!(cfg.lao_delta > 0.0)) fail("lao.delta must be > 0");
    if (cfg.gf_radius < 1) fail("gf.radius must be >= 1");
    if (!(cfg.gf_eps > 0.0)) fail("gf.eps must be > 0");
    if (!(cfg.sampler_lambda > 0.0)) fail("sampler.lambda must be > 0");
    if (cfg.sampler_levels < 1) fail("sampler.levels must be >= 1");
    if (cfg.diffusion_t < 1) fail("diffusion.T must be >= 1");
    if (!(cfg.diffusion_beta1 > 0.0 && cfg.diffusion_beta1 < 1.0)) fail("diffusion.beta1 outside (0,1)");
    if (!(cfg.diffusion_beta_t > 0.0 && cfg.diffusion_beta_t < 1.0)) fail("diffusion.betaT outside (0,1)");
    if (cfg.diffusion_tau_max < 0.0) fail("diffusion.tau_max must be >= 0");
    if (cfg.diffusion_lambda_d < 0.0) fail("diffusion.lambda_d must be >= 0");
    if (cfg.diffusion_lambda_g < 0.0) fail("diffusion.lambda_g must be >= 0");
    if (cfg.encoder_k < 0) fail("encoder.k must be >= 0");
    if (!(cfg.train_lr >= 0.0)) fail("training.lr must be >= 0");
    if (cfg.train_steps < 0) fail("training.steps must be >= 0");
}

}  // namespace lasq
