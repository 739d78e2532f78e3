#include "elcb/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace elcb {

using nlohmann::json;

LoggedDatum weights_from_raw(const RawLoggedExample& example, double pi_prob) {
    if (!(example.p > 0.0)) {
        throw std::invalid_argument(
            "weights_from_raw: logged propensity must be positive");
    }
    if (pi_prob < 0.0) {
        throw std::invalid_argument(
            "weights_from_raw: target probability must be nonnegative");
    }
    return LoggedDatum{pi_prob / example.p, example.r};
}

std::vector<std::string> validate(const Dataset& ds) {
    std::vector<std::string> problems;
    const auto& rg = ds.range;
    if (!(rg.w_min >= 0.0) || !(rg.w_min <= 1.0) || !(rg.w_max >= 1.0)) {
        problems.push_back(
            "weight range must satisfy 0 <= w_min <= 1 <= w_max (got [" +
            std::to_string(rg.w_min) + ", " + std::to_string(rg.w_max) + "])");
    }
    for (size_t i = 0; i < ds.items.size(); ++i) {
        const auto& d = ds.items[i];
        if (!std::isfinite(d.w) || !std::isfinite(d.r)) {
            problems.push_back("item " + std::to_string(i) +
                               ": non-finite value");
            continue;
        }
        if (d.w < 0.0) {
            problems.push_back("item " + std::to_string(i) +
                               ": negative weight " + std::to_string(d.w));
        } else if (d.w < rg.w_min || d.w > rg.w_max) {
            problems.push_back("item " + std::to_string(i) + ": weight " +
                               std::to_string(d.w) +
                               " outside declared range");
        }
        if (d.r < 0.0 || d.r > 1.0) {
            problems.push_back("item " + std::to_string(i) + ": reward " +
                               std::to_string(d.r) + " outside [0, 1]");
        }
    }
    return problems;
}

namespace {

void throw_if_invalid(Dataset& ds, std::optional<WeightRange> range_override) {
    if (range_override) {
        ds.range = *range_override;
    }
    auto problems = validate(ds);
    if (!problems.empty()) {
        std::string msg = "dataset failed validation:";
        for (const auto& p : problems) {
            msg += "\n  " + p;
        }
        throw ValidationError(msg);
    }
}

double require_number(const json& obj, const char* key, long long line_no) {
    if (!obj.contains(key) || !obj[key].is_number()) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": missing numeric field \"" + key + "\"");
    }
    return obj[key].get<double>();
}

}  // namespace

Dataset load_jsonl(const std::string& path,
                   std::optional<WeightRange> range_override) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path);
    }
    Dataset ds;
    bool saw_range = false;
    double max_w = 1.0;
    std::string line;
    long long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        // Skip blank lines.
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " +
                             e.what());
        }
        if (!obj.is_object()) {
            throw ParseError("line " + std::to_string(line_no) +
                             ": expected a JSON object");
        }
        if (obj.contains("w_min") || obj.contains("w_max")) {
            ds.range.w_min = require_number(obj, "w_min", line_no);
            ds.range.w_max = require_number(obj, "w_max", line_no);
            saw_range = true;
            continue;
        }
        if (obj.contains("x")) {
            RawLoggedExample ex;
            if (!obj["x"].is_array()) {
                throw ParseError("line " + std::to_string(line_no) +
                                 ": \"x\" must be an array");
            }
            for (const auto& v : obj["x"]) {
                if (!v.is_number()) {
                    throw ParseError("line " + std::to_string(line_no) +
                                     ": \"x\" must be numeric");
                }
                ex.x.push_back(v.get<double>());
            }
            if (!obj.contains("a") || !obj["a"].is_number_integer()) {
                throw ParseError("line " + std::to_string(line_no) +
                                 ": missing integer field \"a\"");
            }
            ex.a = obj["a"].get<int>();
            ex.p = require_number(obj, "p", line_no);
            ex.r = require_number(obj, "r", line_no);
            double pi_prob = require_number(obj, "pi", line_no);
            LoggedDatum d;
            try {
                d = weights_from_raw(ex, pi_prob);
            } catch (const std::invalid_argument& e) {
                throw ParseError("line " + std::to_string(line_no) + ": " +
                                 e.what());
            }
            ds.items.push_back(d);
            max_w = std::max(max_w, d.w);
            continue;
        }
        LoggedDatum d;
        d.w = require_number(obj, "w", line_no);
        d.r = require_number(obj, "r", line_no);
        ds.items.push_back(d);
        max_w = std::max(max_w, d.w);
    }
    if (!saw_range) {
        ds.range = WeightRange{0.0, max_w};
    }
    throw_if_invalid(ds, range_override);
    return ds;
}

void write_jsonl(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot open " + path + " for writing");
    }
    json range = {{"w_min", ds.range.w_min}, {"w_max", ds.range.w_max}};
    out << range.dump() << "\n";
    for (const auto& d : ds.items) {
        json obj = {{"w", d.w}, {"r", d.r}};
        out << obj.dump() << "\n";
    }
}

std::vector<RawLoggedExample> load_raw_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path);
    }
    std::vector<RawLoggedExample> out;
    std::string line;
    long long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " +
                             e.what());
        }
        if (!obj.is_object() || !obj.contains("x") || !obj["x"].is_array()) {
            throw ParseError("line " + std::to_string(line_no) +
                             ": expected an object with an \"x\" array");
        }
        RawLoggedExample ex;
        for (const auto& v : obj["x"]) {
            if (!v.is_number()) {
                throw ParseError("line " + std::to_string(line_no) +
                                 ": \"x\" must be numeric");
            }
            ex.x.push_back(v.get<double>());
        }
        if (!obj.contains("a") || !obj["a"].is_number_integer()) {
            throw ParseError("line " + std::to_string(line_no) +
                             ": missing integer field \"a\"");
        }
        ex.a = obj["a"].get<int>();
        ex.p = require_number(obj, "p", line_no);
        ex.r = require_number(obj, "r", line_no);
        if (!(ex.p > 0.0)) {
            throw ParseError("line " + std::to_string(line_no) +
                             ": propensity must be positive");
        }
        if (ex.r < 0.0 || ex.r > 1.0) {
            throw ParseError("line " + std::to_string(line_no) +
                             ": reward outside [0, 1]");
        }
        out.push_back(std::move(ex));
    }
    return out;
}

Dataset load_csv(const std::string& path,
                 std::optional<WeightRange> range_override) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(path + ": empty file");
    }
    // Tolerate a UTF-8 byte-order mark and trailing carriage return.
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        line.erase(0, 3);
    }
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
        line.pop_back();
    }
    if (line != "w,r") {
        throw ParseError(path + ": expected header \"w,r\"");
    }
    Dataset ds;
    double max_w = 1.0;
    long long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ss(line);
        std::string wa, ra;
        if (!std::getline(ss, wa, ',') || !std::getline(ss, ra)) {
            throw ParseError("line " + std::to_string(line_no) +
                             ": expected two comma-separated values");
        }
        try {
            double w = std::stod(wa);
            double r = std::stod(ra);
            ds.items.push_back(LoggedDatum{w, r});
            max_w = std::max(max_w, w);
        } catch (const std::exception&) {
            throw ParseError("line " + std::to_string(line_no) +
                             ": malformed number");
        }
    }
    ds.range = WeightRange{0.0, max_w};
    throw_if_invalid(ds, range_override);
    return ds;
}

std::vector<Atom> compress(const Dataset& ds) {
    std::vector<Atom> atoms;
    std::map<std::pair<double, double>, size_t> index;
    for (const auto& d : ds.items) {
        auto key = std::make_pair(d.w, d.r);
        auto it = index.find(key);
        if (it == index.end()) {
            index.emplace(key, atoms.size());
            atoms.push_back(Atom{d.w, d.r, 1.0});
        } else {
            atoms[it->second].count += 1.0;
        }
    }
    return atoms;
}

double atom_count(const std::vector<Atom>& atoms) {
    double n = 0.0;
    for (const auto& a : atoms) n += a.count;
    return n;
}

}  // namespace elcb
