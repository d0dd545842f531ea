#include "anthrofit/profile_io.hpp"

#include "anthrofit/errors.hpp"

#include <fstream>

namespace anthrofit {

ordered_json profile_to_json(const MeasurementProfile& profile) {
    ordered_json array = ordered_json::array();
    for (const auto& spec : profile.specs) {
        ordered_json item;
        item["name"] = spec.name;
        item["type"] = to_string(spec.type);
        if (spec.type == MeasurementType::circumference) {
            item["anchor"] = spec.anchor;
            item["normal"] = {spec.normal.x(), spec.normal.y(), spec.normal.z()};
            item["region"] = spec.region;
        } else {
            item["a"] = spec.a;
            item["b"] = spec.b;
        }
        if (!spec.group.empty()) item["group"] = spec.group;
        array.push_back(std::move(item));
    }
    return array;
}

MeasurementProfile profile_from_json(const ordered_json& array) {
    if (!array.is_array()) throw InputError("profile JSON must be an array of spec objects");
    MeasurementProfile profile;
    for (const auto& item : array) {
        if (!item.is_object()) throw InputError("profile entry is not an object");
        MeasurementSpec spec;
        try {
            spec.name = item.at("name").get<std::string>();
            spec.type = measurement_type_from_string(item.at("type").get<std::string>());
            if (item.contains("group")) spec.group = item.at("group").get<std::string>();
            if (spec.type == MeasurementType::circumference) {
                spec.anchor = item.at("anchor").get<int>();
                const auto& n = item.at("normal");
                if (!n.is_array() || n.size() != 3)
                    throw InputError("measurement '" + spec.name + "': normal must be [x, y, z]");
                spec.normal = Vec3(n[0].get<double>(), n[1].get<double>(), n[2].get<double>());
                spec.region = item.at("region").get<std::vector<int>>();
            } else {
                spec.a = item.at("a").get<int>();
                spec.b = item.at("b").get<int>();
            }
        } catch (const ordered_json::exception& e) {
            throw InputError(std::string("bad profile entry: ") + e.what());
        }
        profile.specs.push_back(std::move(spec));
    }
    validate(profile);
    return profile;
}

MeasurementProfile read_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    ordered_json array;
    try {
        in >> array;
    } catch (const ordered_json::exception& e) {
        throw InputError("cannot parse '" + path + "': " + e.what());
    }
    return profile_from_json(array);
}

void write_profile(const std::string& path, const MeasurementProfile& profile) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open '" + path + "' for writing");
    out << profile_to_json(profile).dump(2) << '\n';
    if (!out) throw InputError("write to '" + path + "' failed");
}

}  // namespace anthrofit
