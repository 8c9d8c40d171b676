#include "dreco/config.hpp"

#include <charconv>
#include <fstream>
#include <random>
#include <sstream>

#include "dreco/errors.hpp"

namespace dreco {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got '" + value + "'");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + value + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError(key + ": expected an unsigned integer, got '" + value + "'");
    }
    return v;
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& key, const std::string& value, Parse parse) {
    std::vector<T> out;
    std::stringstream ss(value);
    std::string token;
    while (std::getline(ss, token, ',')) {
        out.push_back(parse(key, trim(token)));
    }
    if (out.empty()) {
        throw ConfigError(key + ": expected a comma-separated list, got '" + value + "'");
    }
    return out;
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
        throw ConfigError("cannot open config file: " + path);
    }
    RunConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) {
            line.resize(hash);
        }
        const std::string stripped = trim(line);
        if (stripped.empty()) {
            continue;
        }
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
        }
        cfg.set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    }
    return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "dataset") dataset_path = value;
    else if (key == "format") format = value;
    else if (key == "delimiter") delimiter = value;
    else if (key == "mode") mode = value;
    else if (key == "ratios") ratios = value;
    else if (key == "cache_dir") cache_dir = value;
    else if (key == "T") schedule_steps = parse_int(key, value);
    else if (key == "beta_start") beta_start = parse_double(key, value);
    else if (key == "beta_end") beta_end = parse_double(key, value);
    else if (key == "hidden") hidden = parse_int(key, value);
    else if (key == "d_time") d_time = parse_int(key, value);
    else if (key == "p_uncond") p_uncond = parse_double(key, value);
    else if (key == "lr") lr = parse_double(key, value);
    else if (key == "batch_size") batch_size = parse_int(key, value);
    else if (key == "max_steps") max_steps = parse_int(key, value);
    else if (key == "eval_every") eval_every = parse_int(key, value);
    else if (key == "seed") seed = parse_u64(key, value);
    else if (key == "guidance_weight") guidance_weights = parse_list<double>(key, value, parse_double);
    else if (key == "sample_start") sample_start = value;
    else if (key == "start_step") start_step = parse_int(key, value);
    else if (key == "ks") ks = parse_list<int>(key, value, parse_int);
    else if (key == "out_dir") out_dir = value;
    else throw ConfigError("unknown config key: " + key);
}

void RunConfig::validate() const {
    if (format != "rated" && format != "unrated") {
        throw ConfigError("format must be 'rated' or 'unrated', got '" + format + "'");
    }
    if (mode != "clean" && mode != "noisy") {
        throw ConfigError("mode must be 'clean' or 'noisy', got '" + mode + "'");
    }
    if (delimiter.empty()) {
        throw ConfigError("delimiter must be non-empty");
    }
    SplitSpec::parse(ratios);
    if (schedule_steps < 1) {
        throw ConfigError("T must be >= 1");
    }
    if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0)) {
        throw ConfigError("schedule endpoints must satisfy 0 < beta_start <= beta_end < 1");
    }
    if (hidden < 1) {
        throw ConfigError("hidden must be >= 1");
    }
    if (d_time < 2 || d_time % 2 != 0) {
        throw ConfigError("d_time must be even and >= 2");
    }
    if (p_uncond < 0.0 || p_uncond > 1.0) {
        throw ConfigError("p_uncond must lie in [0, 1]");
    }
    if (lr <= 0.0) {
        throw ConfigError("lr must be positive");
    }
    if (batch_size < 1) {
        throw ConfigError("batch_size must be >= 1");
    }
    if (max_steps < 0 || eval_every < 0) {
        throw ConfigError("max_steps and eval_every must be >= 0");
    }
    for (double w : guidance_weights) {
        if (!(w >= 0.0)) {
            throw ConfigError("guidance_weight values must be >= 0");
        }
    }
    if (sample_start != "noised_guidance" && sample_start != "pure_noise") {
        throw ConfigError("sample_start must be 'noised_guidance' or 'pure_noise'");
    }
    if (start_step < 0 || start_step > schedule_steps) {
        throw ConfigError("start_step must lie in [1, T] (or 0 for T)");
    }
    for (int k : ks) {
        if (k < 1) {
            throw ConfigError("eval Ks must be >= 1");
        }
    }
    if (ks.empty()) {
        throw ConfigError("at least one eval K required");
    }
}

std::uint64_t RunConfig::resolve_seed() const {
    if (seed.has_value()) {
        return *seed;
    }
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

TrainConfig RunConfig::trainer_config(std::uint64_t resolved_seed) const {
    TrainConfig tc;
    tc.p_uncond = p_uncond;
    tc.batch_size = batch_size;
    tc.max_steps = max_steps;
    tc.eval_every = eval_every;
    tc.seed = resolved_seed;
    tc.schedule_steps = schedule_steps;
    tc.beta_start = beta_start;
    tc.beta_end = beta_end;
    tc.adam.lr = lr;
    tc.hidden = hidden;
    tc.d_time = d_time;
    tc.ks = ks;
    return tc;
}

CsvFormat RunConfig::csv_format() const {
    return format == "rated" ? CsvFormat::csv_rated : CsvFormat::csv_unrated;
}

FilterMode RunConfig::filter_mode() const {
    return mode == "clean" ? FilterMode::clean : FilterMode::noisy;
}

SampleStart RunConfig::parsed_sample_start() const {
    return sample_start == "pure_noise" ? SampleStart::pure_noise : SampleStart::noised_guidance;
}

}  // namespace dreco
