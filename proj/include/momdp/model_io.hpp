#pragma once

#include "momdp/mdp.hpp"
#include "momdp/memory.hpp"

#include <iosfwd>
#include <string>

namespace momdp {

// A model file bundles the MDP, named reward structures, named queries, and
// optional example points.
struct ModelFile {
    Mdp mdp;
    std::vector<std::pair<std::string, RewardStructure>> rewards;
    std::vector<std::pair<std::string, Query>> queries;
    std::map<std::string, std::vector<Point>> points;  // keyed by query name

    const Query& query(const std::string& name) const;
};

ModelFile parse_model(const std::string& json_text);
ModelFile load_model(const std::string& path);
std::string serialize_model(const ModelFile& file);

Point parse_point(const std::string& text);  // "7/10,0.3,inf"

std::string serialize_strategy(const ModelFile& file, const PureStationaryStrategy& sigma);
std::string serialize_mealy(const ModelFile& file, const MealyStrategy& strategy);
PureStationaryStrategy parse_strategy(const ModelFile& file, const std::string& json_text);

}  // namespace momdp
