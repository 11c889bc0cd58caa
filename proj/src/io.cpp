#include "mfrm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mfrm/errors.hpp"

namespace mfrm {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError(where + ": cannot parse number '" + s + "'");
    }
}

long parse_long(const std::string& s, const std::string& where) {
    long v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw DataError(where + ": cannot parse integer '" + s + "'");
    return v;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    return out;
}

std::map<std::string, int> id_index(const CurveDataset& data) {
    std::map<std::string, int> idx;
    for (int i = 0; i < data.m(); ++i) idx[data.ids[i]] = i;
    return idx;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

std::string format_double(double x) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

CurveDataset read_curves_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    auto head = split_csv_line(line);
    if (head != std::vector<std::string>{"id", "dim", "t", "y"})
        throw DataError(path + ": header must be id,dim,t,y");
    struct Obs {
        long dim, t, line;
        double y;
    };
    std::vector<std::string> order;
    std::map<std::string, std::vector<Obs>> rows;
    long lineno = 1, max_dim = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto f = split_csv_line(line);
        std::string where = path + ":" + std::to_string(lineno);
        if (f.size() != 4) throw DataError(where + ": expected 4 fields");
        if (!rows.count(f[0])) order.push_back(f[0]);
        Obs o{parse_long(f[1], where), parse_long(f[2], where), lineno, 0.0};
        if (f[3].empty() || f[3] == "NA" || f[3] == "nan") throw DataError(where + ": missing value");
        o.y = parse_double(f[3], where);
        if (o.dim < 1 || o.t < 1) throw DataError(where + ": dim and t start at 1");
        max_dim = std::max(max_dim, o.dim);
        rows[f[0]].push_back(o);
    }
    if (order.empty()) throw DataError(path + ": no observations");
    CurveDataset data;
    for (const auto& id : order) {
        const auto& obs = rows[id];
        // per dimension: count and the row of the largest t, to report gaps
        std::vector<long> count(max_dim, 0), top(max_dim, 0), top_line(max_dim, 0);
        for (const auto& o : obs) {
            ++count[o.dim - 1];
            if (o.t > top[o.dim - 1]) {
                top[o.dim - 1] = o.t;
                top_line[o.dim - 1] = o.line;
            }
        }
        std::set<std::pair<long, long>> seen;
        for (const auto& o : obs)
            if (!seen.emplace(o.dim, o.t).second)
                throw DataError(path + ":" + std::to_string(o.line) + ": duplicate entry for " + id);
        for (long d = 0; d < max_dim; ++d) {
            if (count[d] == 0)
                throw DataError(path + ": ragged curve " + id + ": no observations in dim " + std::to_string(d + 1));
            if (count[d] != top[d])
                throw DataError(path + ":" + std::to_string(top_line[d]) + ": non-contiguous t for curve " + id +
                                " in dim " + std::to_string(d + 1));
        }
        const long n = top[0];
        for (long d = 1; d < max_dim; ++d)
            if (top[d] != n)
                throw DataError(path + ":" + std::to_string(top_line[d]) + ": ragged curve " + id + ": dim " +
                                std::to_string(d + 1) + " has " + std::to_string(top[d]) + " points, dim 1 has " +
                                std::to_string(n));
        Eigen::MatrixXd Y(n, max_dim);
        for (const auto& o : obs) Y(o.t - 1, o.dim - 1) = o.y;
        data.ids.push_back(id);
        data.Y.push_back(std::move(Y));
    }
    return data;
}

void read_covariates_csv(const std::string& path, CurveDataset& data) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    auto head = split_csv_line(line);
    if (head.size() < 2 || head[0] != "id") throw DataError(path + ": header must start with id");
    CovariateTable cov;
    cov.names.assign(head.begin() + 1, head.end());
    const std::size_t L = cov.names.size();
    std::map<std::string, std::vector<std::string>> raw;
    bool typed = false;
    auto idx = id_index(data);
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto f = split_csv_line(line);
        const std::string where = path + ":" + std::to_string(lineno);
        if (f.size() != L + 1) throw DataError(where + ": wrong field count");
        if (f[0] == "type") {
            for (std::size_t l = 0; l < L; ++l) {
                if (f[l + 1] != "cont" && f[l + 1] != "cat")
                    throw DataError(where + ": type must be cont or cat");
                cov.categorical.push_back(f[l + 1] == "cat");
            }
            typed = true;
            continue;
        }
        if (!idx.count(f[0])) throw DataError(where + ": unknown id " + f[0]);
        if (raw.count(f[0])) throw DataError(where + ": duplicate id " + f[0]);
        raw[f[0]] = std::vector<std::string>(f.begin() + 1, f.end());
    }
    if (!typed) throw DataError(path + ": missing type row");
    cov.values.resize(data.m(), L);
    cov.levels.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
        if (!cov.categorical[l]) continue;
        std::map<std::string, int> seen;
        for (int i = 0; i < data.m(); ++i) {
            auto it = raw.find(data.ids[i]);
            if (it == raw.end()) throw DataError(path + ": no covariates for " + data.ids[i]);
            seen.emplace(it->second[l], 0);
        }
        for (auto& kv : seen) cov.levels[l].push_back(kv.first);
    }
    for (int i = 0; i < data.m(); ++i) {
        auto it = raw.find(data.ids[i]);
        if (it == raw.end()) throw DataError(path + ": no covariates for " + data.ids[i]);
        for (std::size_t l = 0; l < L; ++l) {
            const auto& v = it->second[l];
            if (cov.categorical[l]) {
                const auto& lv = cov.levels[l];
                cov.values(i, l) = static_cast<double>(std::find(lv.begin(), lv.end(), v) - lv.begin());
            } else {
                if (v.empty() || v == "NA") throw DataError(path + ": missing covariate for " + data.ids[i]);
                cov.values(i, l) = parse_double(v, path);
            }
        }
    }
    data.covariates = std::move(cov);
}

void read_truth_csv(const std::string& path, CurveDataset& data) {
    auto in = open_in(path);
    std::string line;
    std::getline(in, line);
    auto idx = id_index(data);
    data.truth.assign(data.m(), 0);
    std::vector<bool> seen(data.m(), false);
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 2) throw DataError(path + ": expected id,label");
        auto it = idx.find(f[0]);
        if (it == idx.end()) continue;
        data.truth[it->second] = static_cast<int>(parse_long(f[1], path)) - 1;
        seen[it->second] = true;
    }
    for (bool b : seen)
        if (!b) throw DataError(path + ": labels missing for some curves");
}

void write_curves_csv(const std::string& path, const CurveDataset& data) {
    auto out = open_out(path);
    out << "id,dim,t,y\n";
    for (int i = 0; i < data.m(); ++i) {
        const auto& Y = data.Y[i];
        for (Eigen::Index d = 0; d < Y.cols(); ++d)
            for (Eigen::Index t = 0; t < Y.rows(); ++t)
                out << data.ids[i] << ',' << d + 1 << ',' << t + 1 << ',' << format_double(Y(t, d)) << '\n';
    }
}

void write_covariates_csv(const std::string& path, const CurveDataset& data) {
    const auto& cov = data.covariates;
    auto out = open_out(path);
    out << "id";
    for (const auto& n : cov.names) out << ',' << n;
    out << "\ntype";
    for (bool c : cov.categorical) out << ',' << (c ? "cat" : "cont");
    out << '\n';
    for (int i = 0; i < data.m(); ++i) {
        out << data.ids[i];
        for (std::size_t l = 0; l < cov.names.size(); ++l) {
            if (cov.categorical[l]) out << ',' << cov.levels[l][static_cast<int>(cov.values(i, l))];
            else out << ',' << format_double(cov.values(i, l));
        }
        out << '\n';
    }
}

void write_truth_csv(const std::string& path, const CurveDataset& data) {
    auto out = open_out(path);
    out << "id,label\n";
    for (int i = 0; i < data.m(); ++i) out << data.ids[i] << ',' << data.truth[i] + 1 << '\n';
}

}  // namespace mfrm
