#include "ssfgnet/canonical_json.hpp"

#include <cmath>
#include <cstdio>

#include "ssfgnet/error.hpp"

namespace ssfgnet {

namespace {

void write(const nlohmann::json& j, std::string& out) {
    using V = nlohmann::json::value_t;
    switch (j.type()) {
    case V::null: out += "null"; break;
    case V::boolean: out += j.get<bool>() ? "true" : "false"; break;
    case V::number_integer: out += std::to_string(j.get<std::int64_t>()); break;
    case V::number_unsigned: out += std::to_string(j.get<std::uint64_t>()); break;
    case V::number_float: {
        double v = j.get<double>();
        if (!std::isfinite(v)) throw ContractError("canonical_dump: non-finite number");
        if (v == 0.0) v = 0.0;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += buf;
        break;
    }
    case V::string: out += nlohmann::json(j.get<std::string>()).dump(); break;
    case V::array: {
        out += '[';
        bool first = true;
        for (const auto& e : j) {
            if (!first) out += ',';
            first = false;
            write(e, out);
        }
        out += ']';
        break;
    }
    case V::object: {
        // nlohmann::json objects are std::map backed, so iteration is sorted.
        out += '{';
        bool first = true;
        for (const auto& [k, v] : j.items()) {
            if (!first) out += ',';
            first = false;
            out += nlohmann::json(k).dump();
            out += ':';
            write(v, out);
        }
        out += '}';
        break;
    }
    case V::binary:
    case V::discarded: throw ContractError("canonical_dump: unsupported value type");
    }
}

} // namespace

std::string canonical_dump(const nlohmann::json& j) {
    std::string out;
    write(j, out);
    return out;
}

} // namespace ssfgnet
