#include "smalldev/model_io.hpp"

#include <fstream>
#include <sstream>

#include "smalldev/error.hpp"

namespace smalldev {

std::shared_ptr<const EnvironmentModel> model_from_json(const nlohmann::json& doc) {
    try {
        std::vector<MixtureComponent> components;
        for (const auto& c : doc.at("components")) {
            const auto kind = c.at("kind").get<std::string>();
            const double weight = c.value("weight", 1.0);
            if (kind == "lattice") {
                std::vector<std::pair<int, double>> pmf;
                for (const auto& entry : c.at("pmf")) {
                    pmf.emplace_back(entry.at(0).get<int>(), entry.at(1).get<double>());
                }
                components.push_back({StepLaw::lattice(c.value("spacing", 1.0), std::move(pmf)), weight});
            } else if (kind == "gaussian") {
                components.push_back({StepLaw::gaussian(c.value("mean", 0.0), c.value("variance", 1.0)), weight});
            } else {
                throw Error(ErrorCode::UnsupportedLaw, "unknown component kind '" + kind + "'");
            }
        }
        return std::make_shared<const EnvironmentModel>(std::move(components));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
}

std::shared_ptr<const EnvironmentModel> model_from_json_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    return model_from_json(doc);
}

std::shared_ptr<const EnvironmentModel> load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::InvalidArgument, "cannot open model file " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return model_from_json_text(buf.str());
}

nlohmann::json model_to_json(const EnvironmentModel& model) {
    nlohmann::json out;
    out["components"] = nlohmann::json::array();
    for (const auto& c : model.components()) {
        nlohmann::json j;
        if (c.law.is_lattice()) {
            const auto& lat = c.law.as_lattice();
            j["kind"] = "lattice";
            j["spacing"] = lat.spacing;
            j["pmf"] = nlohmann::json::array();
            for (const auto& [k, p] : lat.pmf) {
                j["pmf"].push_back({k, p});
            }
        } else {
            const auto& g = c.law.as_gaussian();
            j["kind"] = "gaussian";
            j["mean"] = g.mean;
            j["variance"] = g.variance;
        }
        j["weight"] = c.weight;
        out["components"].push_back(std::move(j));
    }
    return out;
}

}  // namespace smalldev
