#include "riskdp/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace riskdp {

namespace {

using nlohmann::json;

const json& field(const json& doc, const char* name) {
    auto it = doc.find(name);
    if (it == doc.end()) throw FormatError(std::string("model file is missing field '") + name + "'");
    return *it;
}

std::vector<std::string> labels(const json& doc, const char* name) {
    const json& arr = field(doc, name);
    if (!arr.is_array() || arr.empty()) throw FormatError(std::string("'") + name + "' must be a non-empty array");
    std::vector<std::string> out;
    for (const auto& v : arr) {
        if (!v.is_string()) throw FormatError(std::string("'") + name + "' entries must be strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

const json& expect_array(const json& node, std::size_t size, const std::string& what) {
    if (!node.is_array() || node.size() != size)
        throw FormatError("'" + what + "' has wrong shape (expected array of " + std::to_string(size) + ")");
    return node;
}

double number(const json& v, const std::string& what) {
    if (!v.is_number()) throw FormatError("'" + what + "' entries must be numbers");
    return v.get<double>();
}

} // namespace

FiniteModel parse_model_json(const std::string& text, const LoadOptions& options) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("model file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw FormatError("model file must be a JSON object");

    const json& h = field(doc, "horizon");
    if (!h.is_number_integer() || h.get<long long>() < 1) throw FormatError("'horizon' must be a positive integer");

    Dimensions d;
    d.horizon = static_cast<Stage>(h.get<long long>());
    auto states = labels(doc, "states");
    auto actions = labels(doc, "actions");
    auto disturbances = labels(doc, "disturbances");
    d.states = static_cast<std::int32_t>(states.size());
    d.actions = static_cast<std::int32_t>(actions.size());
    d.disturbances = static_cast<std::int32_t>(disturbances.size());

    const std::size_t n4 = static_cast<std::size_t>(d.horizon) * d.states * d.actions * d.disturbances;
    std::vector<StateIndex> dynamics;
    std::vector<double> kernel;
    std::vector<double> stage_cost;
    std::vector<double> terminal_cost;
    dynamics.reserve(n4);
    kernel.reserve(n4);

    const json& dyn = expect_array(field(doc, "dynamics"), static_cast<std::size_t>(d.horizon), "dynamics");
    const json& ker = expect_array(field(doc, "kernel"), static_cast<std::size_t>(d.horizon), "kernel");
    const json& sc = expect_array(field(doc, "stage_cost"), static_cast<std::size_t>(d.horizon), "stage_cost");
    for (Stage t = 0; t < d.horizon; ++t) {
        const json& dyn_t = expect_array(dyn[t], static_cast<std::size_t>(d.states), "dynamics");
        const json& ker_t = expect_array(ker[t], static_cast<std::size_t>(d.states), "kernel");
        const json& sc_t = expect_array(sc[t], static_cast<std::size_t>(d.states), "stage_cost");
        for (StateIndex x = 0; x < d.states; ++x) {
            const json& dyn_x = expect_array(dyn_t[x], static_cast<std::size_t>(d.actions), "dynamics");
            const json& ker_x = expect_array(ker_t[x], static_cast<std::size_t>(d.actions), "kernel");
            const json& sc_x = expect_array(sc_t[x], static_cast<std::size_t>(d.actions), "stage_cost");
            for (ActionIndex u = 0; u < d.actions; ++u) {
                const json& dyn_u = expect_array(dyn_x[u], static_cast<std::size_t>(d.disturbances), "dynamics");
                const json& ker_u = expect_array(ker_x[u], static_cast<std::size_t>(d.disturbances), "kernel");
                const std::size_t row_start = kernel.size();
                for (DisturbanceIndex w = 0; w < d.disturbances; ++w) {
                    if (!dyn_u[w].is_number_integer()) throw FormatError("'dynamics' entries must be integers");
                    dynamics.push_back(static_cast<StateIndex>(dyn_u[w].get<long long>()));
                    kernel.push_back(number(ker_u[w], "kernel"));
                }
                if (options.renormalize) {
                    double sum = 0.0;
                    for (std::size_t i = row_start; i < kernel.size(); ++i) sum += kernel[i];
                    if (sum != 1.0 && std::abs(sum - 1.0) <= kRenormalizeWindow)
                        for (std::size_t i = row_start; i < kernel.size(); ++i) kernel[i] /= sum;
                }
                stage_cost.push_back(number(sc_x[u], "stage_cost"));
            }
        }
    }
    const json& term = expect_array(field(doc, "terminal_cost"), static_cast<std::size_t>(d.states), "terminal_cost");
    for (const auto& v : term) terminal_cost.push_back(number(v, "terminal_cost"));

    return FiniteModel(d, std::move(dynamics), std::move(kernel), std::move(stage_cost), std::move(terminal_cost),
                       std::move(states), std::move(actions), std::move(disturbances));
}

FiniteModel load_model_json(const std::filesystem::path& path, const LoadOptions& options) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open model file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model_json(buf.str(), options);
}

std::string model_to_json(const FiniteModel& m) {
    const auto& d = m.dims();
    json doc;
    doc["horizon"] = d.horizon;
    doc["states"] = m.state_labels();
    doc["actions"] = m.action_labels();
    doc["disturbances"] = m.disturbance_labels();
    json dyn = json::array(), ker = json::array(), sc = json::array();
    for (Stage t = 0; t < d.horizon; ++t) {
        json dyn_t = json::array(), ker_t = json::array(), sc_t = json::array();
        for (StateIndex x = 0; x < d.states; ++x) {
            json dyn_x = json::array(), ker_x = json::array(), sc_x = json::array();
            for (ActionIndex u = 0; u < d.actions; ++u) {
                const auto next = m.successors(t, x, u);
                const auto probs = m.kernel_row(t, x, u);
                dyn_x.push_back(json(std::vector<StateIndex>(next.begin(), next.end())));
                ker_x.push_back(json(std::vector<double>(probs.begin(), probs.end())));
                sc_x.push_back(m.stage_cost(t, x, u));
            }
            dyn_t.push_back(std::move(dyn_x));
            ker_t.push_back(std::move(ker_x));
            sc_t.push_back(std::move(sc_x));
        }
        dyn.push_back(std::move(dyn_t));
        ker.push_back(std::move(ker_t));
        sc.push_back(std::move(sc_t));
    }
    doc["dynamics"] = std::move(dyn);
    doc["kernel"] = std::move(ker);
    doc["stage_cost"] = std::move(sc);
    doc["terminal_cost"] = m.terminal_cost_table();
    return doc.dump() + "\n";
}

void save_model_json(const FiniteModel& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot write model file " + path.string());
    out << model_to_json(m);
    if (!out) throw std::ios_base::failure("write failed for " + path.string());
}

} // namespace riskdp
