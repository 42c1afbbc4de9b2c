#include "slicerec/harness/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace srec {

namespace {

// Single source of truth for the key table: maps "section.key" to accessors.
struct Field {
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&)> set;
};

std::string fmt_double(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

const std::vector<std::pair<std::string, Field>>& field_table() {
    auto str_field = [](auto member) {
        return Field{[member](const ExperimentConfig& c) { return c.*member; },
                     [member](ExperimentConfig& c, const std::string& v) { c.*member = v; }};
    };
    (void)str_field;
    static const std::vector<std::pair<std::string, Field>> table = [] {
        std::vector<std::pair<std::string, Field>> t;
        auto add = [&](const std::string& name, auto getter, auto setter) {
            t.push_back({name, Field{getter, setter}});
        };
#define SREC_STR(name, expr)                                               \
    add(name, [](const ExperimentConfig& c) { return c.expr; },            \
        [](ExperimentConfig& c, const std::string& v) { c.expr = v; })
#define SREC_INT(name, expr)                                                        \
    add(name, [](const ExperimentConfig& c) { return std::to_string(c.expr); },     \
        [](ExperimentConfig& c, const std::string& v) { c.expr = std::stoi(v); })
#define SREC_U64(name, expr)                                                        \
    add(name, [](const ExperimentConfig& c) { return std::to_string(c.expr); },     \
        [](ExperimentConfig& c, const std::string& v) { c.expr = std::stoull(v); })
#define SREC_DBL(name, expr)                                                  \
    add(name, [](const ExperimentConfig& c) { return fmt_double(c.expr); },   \
        [](ExperimentConfig& c, const std::string& v) { c.expr = std::stod(v); })
#define SREC_BOOL(name, expr)                                                          \
    add(name, [](const ExperimentConfig& c) { return c.expr ? "true" : "false"; },     \
        [](ExperimentConfig& c, const std::string& v) { c.expr = (v == "true" || v == "1"); })

        SREC_STR("dataset.families", dataset.families);
        SREC_INT("dataset.n_shapes", dataset.n_shapes);
        SREC_INT("dataset.views_per_shape", dataset.views_per_shape);
        SREC_U64("dataset.seed", dataset.seed);
        SREC_STR("dataset.frame", dataset.frame);
        SREC_DBL("dataset.jitter_scale_min", dataset.jitter_scale_min);
        SREC_BOOL("dataset.jitter_translate", dataset.jitter_translate);

        SREC_INT("model.image_size", model.image_size);
        SREC_INT("model.n_slices", model.n_slices);
        SREC_INT("model.code_dim", model.code_dim);
        SREC_INT("model.n_channels", model.n_channels);
        SREC_INT("model.n_points", model.n_points);
        SREC_INT("model.unet_base", model.unet_base);
        SREC_INT("model.unet_levels", model.unet_levels);
        SREC_INT("model.denoiser_base", model.denoiser_base);
        SREC_INT("model.denoiser_levels", model.denoiser_levels);
        SREC_INT("model.transformer_layers", model.transformer_layers);
        SREC_INT("model.heads", model.heads);
        SREC_INT("model.field_levels", model.field_levels);
        SREC_INT("model.diffusion_steps", model.diffusion_steps);
        SREC_STR("model.stack_mode", model.stack_mode);
        SREC_BOOL("model.onehot_codes", model.onehot_codes);
        SREC_STR("model.axes", model.axes);

        SREC_INT("train.steps", train.steps);
        SREC_DBL("train.lr", train.lr);
        SREC_DBL("train.lambda_imp", train.lambda_imp);
        SREC_INT("train.batch_queries", train.batch_queries);
        SREC_INT("train.checkpoint_every", train.checkpoint_every);
        SREC_BOOL("train.lr_decay", train.lr_decay);
        SREC_U64("train.seed", train.seed);

        SREC_BOOL("render.fill_holes", render.fill_holes);
        SREC_BOOL("render.textured", render.textured);
        SREC_DBL("render.backface", render.backface);

        SREC_INT("reconstruct.resolution", reconstruct.resolution);
        SREC_INT("reconstruct.batch", reconstruct.batch);
#undef SREC_STR
#undef SREC_INT
#undef SREC_U64
#undef SREC_DBL
#undef SREC_BOOL
        return t;
    }();
    return table;
}

}  // namespace

std::string ExperimentConfig::to_text() const {
    std::ostringstream os;
    std::string section;
    for (const auto& [name, field] : field_table()) {
        const std::string sec = name.substr(0, name.find('.'));
        if (sec != section) {
            if (!section.empty()) os << "\n";
            os << "[" << sec << "]\n";
            section = sec;
        }
        os << name.substr(name.find('.') + 1) << " = " << field.get(*this) << "\n";
    }
    return os.str();
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: bad line " + std::to_string(line_no));
        const std::string key = section + "." + trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        cfg.apply_override(key + "=" + value);
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

void ExperimentConfig::apply_override(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("config override must look like section.key=value: " + kv);
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t");
        const auto b = s.find_last_not_of(" \t");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(kv.substr(0, eq));
    const std::string value = trim(kv.substr(eq + 1));
    for (const auto& [name, field] : field_table()) {
        if (name == key) {
            field.set(*this, value);
            return;
        }
    }
    throw std::invalid_argument("config: unknown key " + key);
}

uint64_t ExperimentConfig::hash() const {
    const std::string text = to_text();
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace srec
