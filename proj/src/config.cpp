#include "rcp/config.hpp"

#include "rcp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

namespace rcp {

namespace {

struct Value {
    enum class Kind { Number, String, NumberList, Record };
    Kind kind = Kind::Number;
    double number = 0.0;
    std::string string;
    std::vector<double> list;
    std::vector<std::pair<std::string, Value>> record;
};

struct Section {
    std::string name;
    std::vector<std::pair<std::string, Value>> entries;
};

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

// splits on top-level commas, respecting [] and {} nesting
std::vector<std::string> split_top_level(const std::string& s) {
    std::vector<std::string> parts;
    int depth = 0;
    std::string current;
    for (char c : s) {
        if (c == '[' || c == '{') ++depth;
        if (c == ']' || c == '}') --depth;
        if (c == ',' && depth == 0) {
            parts.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    if (!trim(current).empty() || !parts.empty()) parts.push_back(current);
    return parts;
}

double parse_number(const std::string& text, const std::string& context) {
    const std::string t = trim(text);
    if (t.empty()) throw ConfigError("empty number for key '" + context + "'");
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size())
        throw ConfigError("key '" + context + "': cannot parse number from '" + t + "'");
    return v;
}

Value parse_value(const std::string& raw, const std::string& context) {
    const std::string t = trim(raw);
    if (t.empty()) throw ConfigError("key '" + context + "' has no value");
    Value v;
    if (t.front() == '"') {
        if (t.size() < 2 || t.back() != '"')
            throw ConfigError("key '" + context + "': unterminated string literal");
        v.kind = Value::Kind::String;
        v.string = t.substr(1, t.size() - 2);
        return v;
    }
    if (t.front() == '[') {
        if (t.back() != ']')
            throw ConfigError("key '" + context + "': unterminated list literal");
        v.kind = Value::Kind::NumberList;
        const std::string inner = t.substr(1, t.size() - 2);
        if (!trim(inner).empty())
            for (const std::string& part : split_top_level(inner))
                v.list.push_back(parse_number(part, context));
        return v;
    }
    if (t.front() == '{') {
        if (t.back() != '}')
            throw ConfigError("key '" + context + "': unterminated record literal");
        v.kind = Value::Kind::Record;
        const std::string inner = t.substr(1, t.size() - 2);
        for (const std::string& part : split_top_level(inner)) {
            const auto eq = part.find('=');
            if (eq == std::string::npos)
                throw ConfigError("key '" + context + "': record entry '" + trim(part) +
                                  "' is not of the form name = value");
            const std::string name = trim(part.substr(0, eq));
            v.record.emplace_back(name, parse_value(part.substr(eq + 1), context + "." + name));
        }
        return v;
    }
    v.kind = Value::Kind::Number;
    v.number = parse_number(t, context);
    return v;
}

std::vector<Section> parse_sections(const std::string& text) {
    std::vector<Section> sections;
    std::istringstream stream(text);
    std::string line;
    int line_number = 0;
    while (std::getline(stream, line)) {
        ++line_number;
        // strip comments outside string literals
        bool in_string = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_string = !in_string;
            if (line[i] == '#' && !in_string) {
                line.resize(i);
                break;
            }
        }
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("line " + std::to_string(line_number) +
                                  ": malformed section header '" + t + "'");
            sections.push_back({trim(t.substr(1, t.size() - 2)), {}});
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_number) + ": expected key = value, got '" +
                              t + "'");
        if (sections.empty())
            throw ConfigError("line " + std::to_string(line_number) +
                              ": key outside of any [section]");
        const std::string key = trim(t.substr(0, eq));
        if (key.empty())
            throw ConfigError("line " + std::to_string(line_number) + ": empty key");
        sections.back().entries.emplace_back(
            key, parse_value(t.substr(eq + 1), sections.back().name + "." + key));
    }
    return sections;
}

// Tracks consumption so leftover keys can be reported as unknown.
class EntryReader {
  public:
    EntryReader(const Section& section) : section_(section), used_(section.entries.size(), false) {}

    const Value* find(const std::string& key) {
        for (std::size_t i = 0; i < section_.entries.size(); ++i)
            if (!used_[i] && section_.entries[i].first == key) {
                used_[i] = true;
                return &section_.entries[i].second;
            }
        return nullptr;
    }

    double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
        const Value* v = find(key);
        if (!v) {
            if (fallback) return *fallback;
            throw ConfigError("[" + section_.name + "] is missing required key '" + key + "'");
        }
        if (v->kind != Value::Kind::Number)
            throw ConfigError("[" + section_.name + "] key '" + key + "' must be a number");
        return v->number;
    }

    std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
        const Value* v = find(key);
        if (!v) {
            if (fallback) return *fallback;
            throw ConfigError("[" + section_.name + "] is missing required key '" + key + "'");
        }
        if (v->kind != Value::Kind::String)
            throw ConfigError("[" + section_.name + "] key '" + key + "' must be a quoted string");
        return v->string;
    }

    std::vector<const Value*> all(const std::string& key) {
        std::vector<const Value*> values;
        for (std::size_t i = 0; i < section_.entries.size(); ++i)
            if (section_.entries[i].first == key) {
                used_[i] = true;
                values.push_back(&section_.entries[i].second);
            }
        return values;
    }

    void finish() const {
        for (std::size_t i = 0; i < section_.entries.size(); ++i) {
            if (used_[i]) continue;
            for (std::size_t j = 0; j < i; ++j)
                if (used_[j] && section_.entries[j].first == section_.entries[i].first)
                    throw ConfigError("duplicate key '" + section_.entries[i].first + "' in [" +
                                      section_.name + "]");
            throw ConfigError("unknown key '" + section_.entries[i].first + "' in [" +
                              section_.name + "]");
        }
    }

  private:
    const Section& section_;
    std::vector<bool> used_;
};

int to_int(double x, const std::string& context) {
    if (std::fabs(x - std::llround(x)) > 1e-9)
        throw ConfigError("key '" + context + "' must be an integer, got " + std::to_string(x));
    return int(std::llround(x));
}

Scenario build_scenario(const Section& section) {
    EntryReader reader(section);
    const int K = to_int(reader.number("K"), "scenario.K");
    const double c = reader.number("c");
    const double lambda = reader.number("lambda");
    const std::string family = reader.string("utility.family");
    if (family != "scaled_power")
        throw ConfigError("scenario.utility.family: unknown family '" + family +
                          "' (supported: \"scaled_power\")");
    const double a = reader.number("utility.a");
    const double alpha = reader.number("utility.alpha");
    reader.finish();
    try {
        return Scenario(K, c, lambda, UtilityFunction::scaled_power(a, alpha));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("[scenario] invalid: ") + e.what());
    }
}

std::vector<double> number_list(const Value& v, const std::string& context) {
    if (v.kind == Value::Kind::NumberList) return v.list;
    throw ConfigError("key '" + context + "' must be a list like [1, 2, 3]");
}

Mechanism build_mechanism(const Section& section, const Scenario& scenario) {
    EntryReader reader(section);
    const std::string kind = reader.string("kind");
    Mechanism mechanism;
    if (kind == "committed_spend") {
        CommittedSpendContract contract;
        contract.committed_quantity = reader.number("q_bar");
        contract.committed_payment = reader.number("t_bar");
        contract.overage_price = reader.number("p");
        contract.validate();
        mechanism = contract;
    } else if (kind == "constant") {
        ConstantBundle bundle;
        bundle.quantity_per_service = reader.number("q");
        bundle.transfer = reader.number("t");
        bundle.validate();
        mechanism = bundle;
    } else if (kind == "linear") {
        LinearTariff tariff;
        tariff.price = reader.number("p");
        tariff.validate();
        mechanism = tariff;
    } else if (kind == "menu") {
        FiniteMenu menu;
        for (const Value* option_value : reader.all("option")) {
            if (option_value->kind != Value::Kind::Record)
                throw ConfigError("[mechanism] 'option' must be a record {q = [..], t = ..}");
            MenuOption option;
            bool saw_q = false, saw_t = false;
            for (const auto& [name, v] : option_value->record) {
                if (name == "q") {
                    option.allocation = number_list(v, "mechanism.option.q");
                    saw_q = true;
                } else if (name == "t") {
                    if (v.kind != Value::Kind::Number)
                        throw ConfigError("mechanism.option.t must be a number");
                    option.transfer = v.number;
                    saw_t = true;
                } else {
                    throw ConfigError("unknown key '" + name + "' in mechanism option record");
                }
            }
            if (!saw_q || !saw_t)
                throw ConfigError("mechanism option record needs both q and t");
            menu.options.push_back(std::move(option));
        }
        menu.validate(std::size_t(scenario.num_services));
        mechanism = menu;
    } else {
        throw ConfigError("mechanism.kind: unknown kind '" + kind +
                          "' (supported: \"committed_spend\", \"constant\", \"linear\", \"menu\")");
    }
    reader.finish();
    return mechanism;
}

DiscreteDistribution build_distribution(const Section& section, const Scenario& scenario) {
    EntryReader reader(section);
    const auto points = reader.all("point");
    if (!points.empty()) {
        std::vector<TypeVector> support;
        std::vector<double> weights;
        for (const Value* point : points) {
            if (point->kind != Value::Kind::Record)
                throw ConfigError("[distribution] 'point' must be a record {theta = [..], w = ..}");
            std::vector<double> theta;
            double w = 0.0;
            bool saw_theta = false, saw_w = false;
            for (const auto& [name, v] : point->record) {
                if (name == "theta") {
                    theta = number_list(v, "distribution.point.theta");
                    saw_theta = true;
                } else if (name == "w") {
                    if (v.kind != Value::Kind::Number)
                        throw ConfigError("distribution.point.w must be a number");
                    w = v.number;
                    saw_w = true;
                } else {
                    throw ConfigError("unknown key '" + name + "' in distribution point record");
                }
            }
            if (!saw_theta || !saw_w)
                throw ConfigError("distribution point record needs both theta and w");
            support.emplace_back(std::move(theta));
            weights.push_back(w);
        }
        reader.finish();
        try {
            DiscreteDistribution F(std::move(support), std::move(weights));
            if (F.dimension() != std::size_t(scenario.num_services))
                throw ConfigError("[distribution] points have dimension " +
                                  std::to_string(F.dimension()) + ", scenario has K = " +
                                  std::to_string(scenario.num_services));
            return F;
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("[distribution] invalid: ") + e.what());
        }
    }

    const std::string family = reader.string("family");
    if (family == "two_point") {
        const double s_lo = reader.number("s_lo");
        const double s_hi = reader.number("s_hi");
        reader.finish();
        return two_point(scenario, s_lo, s_hi);
    }
    if (family == "diagonal_grid") {
        const int n = to_int(reader.number("n"), "distribution.n");
        reader.finish();
        return diagonal_grid(scenario, n);
    }
    if (family == "independent_uniform") {
        const int n = to_int(reader.number("n"), "distribution.n");
        reader.finish();
        return independent_discrete_uniform(scenario, n);
    }
    if (family == "diagonal_dirac") {
        reader.finish();
        return diagonal_dirac(scenario);
    }
    throw ConfigError("distribution.family: unknown family '" + family +
                      "' (supported: \"two_point\", \"diagonal_grid\", \"independent_uniform\", "
                      "\"diagonal_dirac\", or literal point records)");
}

AdversaryConfig build_adversary(const Section& section) {
    EntryReader reader(section);
    AdversaryConfig config;
    if (const Value* levels = reader.find("levels")) {
        config.levels.clear();
        for (double level : number_list(*levels, "adversary.levels"))
            config.levels.push_back(to_int(level, "adversary.levels"));
        if (config.levels.empty())
            throw ConfigError("adversary.levels must contain at least one resolution");
    }
    if (const Value* cap = reader.find("cap")) {
        if (cap->kind != Value::Kind::Number || cap->number < 1)
            throw ConfigError("adversary.cap must be a positive number");
        config.cap = std::size_t(cap->number);
    }
    const std::string method = reader.string("method", std::string("two_point"));
    if (method == "two_point")
        config.method = WorstCaseMethod::TwoPointSearch;
    else if (method == "grid_lp")
        config.method = WorstCaseMethod::GridLP;
    else
        throw ConfigError("adversary.method: unknown method '" + method +
                          "' (supported: \"two_point\", \"grid_lp\")");
    reader.finish();
    return config;
}

VerifyConfig build_verify(const Section& section) {
    EntryReader reader(section);
    VerifyConfig config;
    config.n_menus = to_int(reader.number("n_menus", double(config.n_menus)), "verify.n_menus");
    if (config.n_menus < 1) throw ConfigError("verify.n_menus must be >= 1");
    const double seed = reader.number("seed", double(config.seed));
    if (seed < 0) throw ConfigError("verify.seed must be nonnegative");
    config.seed = std::uint64_t(seed);
    config.samples = to_int(reader.number("samples", double(config.samples)), "verify.samples");
    if (config.samples < 1) throw ConfigError("verify.samples must be >= 1");
    reader.finish();
    return config;
}

OutputConfig build_output(const Section& section) {
    EntryReader reader(section);
    OutputConfig config;
    config.format = reader.string("format", std::string("table"));
    if (config.format != "table" && config.format != "csv")
        throw ConfigError("output.format must be \"table\" or \"csv\", got '" + config.format +
                          "'");
    config.path = reader.string("path", std::string{});
    reader.finish();
    return config;
}

} // namespace

RunConfig parse_config_text(const std::string& text) {
    const std::vector<Section> sections = parse_sections(text);

    const Section* scenario_section = nullptr;
    for (const Section& section : sections) {
        if (section.name == "scenario") {
            if (scenario_section) throw ConfigError("duplicate [scenario] section");
            scenario_section = &section;
        } else if (section.name != "mechanism" && section.name != "distribution" &&
                   section.name != "adversary" && section.name != "verify" &&
                   section.name != "output") {
            throw ConfigError("unknown section [" + section.name + "]");
        }
    }
    if (!scenario_section) throw ConfigError("config is missing the required [scenario] section");

    RunConfig config{build_scenario(*scenario_section), {}, std::nullopt, {}, {}, {}};

    bool saw_distribution = false, saw_adversary = false, saw_verify = false, saw_output = false;
    for (const Section& section : sections) {
        if (section.name == "mechanism") {
            config.mechanisms.push_back(build_mechanism(section, config.scenario));
        } else if (section.name == "distribution") {
            if (saw_distribution) throw ConfigError("duplicate [distribution] section");
            saw_distribution = true;
            config.distribution = build_distribution(section, config.scenario);
        } else if (section.name == "adversary") {
            if (saw_adversary) throw ConfigError("duplicate [adversary] section");
            saw_adversary = true;
            config.adversary = build_adversary(section);
        } else if (section.name == "verify") {
            if (saw_verify) throw ConfigError("duplicate [verify] section");
            saw_verify = true;
            config.verify = build_verify(section);
        } else if (section.name == "output") {
            if (saw_output) throw ConfigError("duplicate [output] section");
            saw_output = true;
            config.output = build_output(section);
        }
    }
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return parse_config_text(buffer.str());
}

} // namespace rcp
