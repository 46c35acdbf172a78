#include "pdhj/path_io.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "pdhj/error.hpp"

namespace pdhj {

namespace {

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_number(const std::string& field, std::size_t line) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(field, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != field.size()) {
        throw DomainError("pathcore", "bad number '" + field + "' on CSV line " + std::to_string(line));
    }
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) {
            field.pop_back();
        }
        while (!field.empty() && field.front() == ' ') {
            field.erase(field.begin());
        }
        out.push_back(field);
    }
    return out;
}

}  // namespace

void write_path_csv(std::ostream& os, const Path& x) {
    os << "t";
    for (std::size_t i = 1; i <= x.dim(); ++i) {
        os << ",x_" << i;
    }
    os << "\n";
    for (std::size_t k = 0; k < x.grid().size(); ++k) {
        os << format_number(x.grid().node(k));
        const Vec& v = x.value(k);
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            os << "," << format_number(v[i]);
        }
        os << "\n";
    }
}

Path read_path_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) {
        throw DomainError("pathcore", "empty path CSV");
    }
    const auto header = split_csv(line);
    if (header.size() < 2 || header[0] != "t") {
        throw DomainError("pathcore", "path CSV header must start with t,x_1");
    }
    for (std::size_t i = 1; i < header.size(); ++i) {
        if (header[i] != "x_" + std::to_string(i)) {
            throw DomainError("pathcore", "unexpected path CSV column '" + header[i] + "'");
        }
    }
    const std::size_t dim = header.size() - 1;
    std::vector<double> times;
    std::vector<Vec> values;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto fields = split_csv(line);
        if (fields.size() != dim + 1) {
            throw DomainError("pathcore", "wrong column count on CSV line " + std::to_string(line_no));
        }
        times.push_back(parse_number(fields[0], line_no));
        Vec v(static_cast<Eigen::Index>(dim));
        for (std::size_t i = 0; i < dim; ++i) {
            v[static_cast<Eigen::Index>(i)] = parse_number(fields[i + 1], line_no);
        }
        values.push_back(std::move(v));
    }
    return Path(TimeGrid::from_nodes(std::move(times)), std::move(values));
}

nlohmann::json path_to_json(const Path& x) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t k = 0; k < x.grid().size(); ++k) {
        const Vec& v = x.value(k);
        arr.push_back({{"t", x.grid().node(k)}, {"x", std::vector<double>(v.data(), v.data() + v.size())}});
    }
    return arr;
}

Path path_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty()) {
        throw DomainError("pathcore", "path JSON must be a non-empty array");
    }
    std::vector<double> times;
    std::vector<Vec> values;
    for (const auto& row : j) {
        if (!row.is_object() || !row.contains("t") || !row.contains("x") || !row["x"].is_array()) {
            throw DomainError("pathcore", "path JSON rows must be {\"t\": number, \"x\": [numbers]}");
        }
        times.push_back(row["t"].get<double>());
        const auto xs = row["x"].get<std::vector<double>>();
        values.push_back(Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size())));
    }
    return Path(TimeGrid::from_nodes(std::move(times)), std::move(values));
}

}  // namespace pdhj
