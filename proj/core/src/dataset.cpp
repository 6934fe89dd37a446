#include "fairbench/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "fairbench/rng.hpp"

namespace fairbench {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

bool is_binary(const std::vector<int>& col) {
    return std::all_of(col.begin(), col.end(), [](int v) { return v == 0 || v == 1; });
}

}  // namespace

Dataset::Dataset(std::vector<double> features, std::size_t n_cols,
                 std::vector<std::string> feature_names,
                 std::vector<int> label,
                 std::vector<std::string> sensitive_names,
                 std::vector<std::vector<int>> sensitive_columns,
                 std::vector<double> weights)
    : d_(n_cols),
      features_(std::move(features)),
      feature_names_(std::move(feature_names)),
      label_(std::move(label)),
      sensitive_names_(std::move(sensitive_names)),
      sensitive_columns_(std::move(sensitive_columns)),
      weights_(std::move(weights)) {
    require(d_ > 0, "dataset: at least one feature column required");
    require(features_.size() % d_ == 0, "dataset: feature buffer size not a multiple of column count");
    n_ = features_.size() / d_;
    require(n_ >= 1, "dataset: at least one row required");
    require(feature_names_.size() == d_, "dataset: feature name count mismatch");
    require(label_.size() == n_, "dataset: label length mismatch");
    require(is_binary(label_), "dataset: labels must be 0 or 1");
    require(!sensitive_columns_.empty(), "dataset: at least one sensitive column required");
    require(sensitive_names_.size() == sensitive_columns_.size(), "dataset: sensitive name count mismatch");
    for (std::size_t k = 0; k < sensitive_columns_.size(); ++k) {
        require(sensitive_columns_[k].size() == n_,
                "dataset: sensitive column '" + sensitive_names_[k] + "' length mismatch");
        require(is_binary(sensitive_columns_[k]),
                "dataset: sensitive column '" + sensitive_names_[k] + "' must be 0 or 1");
    }
    for (std::size_t k = 0; k + 1 < sensitive_names_.size(); ++k) {
        for (std::size_t m = k + 1; m < sensitive_names_.size(); ++m) {
            require(sensitive_names_[k] != sensitive_names_[m],
                    "dataset: duplicate sensitive column '" + sensitive_names_[k] + "'");
        }
    }
    for (double v : features_) {
        require(std::isfinite(v), "dataset: non-finite feature value");
    }
    if (weights_.empty()) weights_.assign(n_, 1.0);
    require(weights_.size() == n_, "dataset: weight length mismatch");
    double total = 0.0;
    for (double w : weights_) {
        require(std::isfinite(w) && w >= 0.0, "dataset: weights must be finite and nonnegative");
        total += w;
    }
    require(total > 0.0, "dataset: at least one weight must be positive");
}

std::size_t Dataset::feature_index(const std::string& name) const {
    auto it = std::find(feature_names_.begin(), feature_names_.end(), name);
    if (it == feature_names_.end()) throw std::invalid_argument("dataset: unknown feature column '" + name + "'");
    return static_cast<std::size_t>(it - feature_names_.begin());
}

double Dataset::total_weight() const {
    return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

const std::vector<int>& Dataset::sensitive(const std::string& name) const {
    for (std::size_t k = 0; k < sensitive_names_.size(); ++k) {
        if (sensitive_names_[k] == name) return sensitive_columns_[k];
    }
    throw std::invalid_argument("dataset: unknown sensitive column '" + name + "'");
}

bool Dataset::has_sensitive(const std::string& name) const {
    return std::find(sensitive_names_.begin(), sensitive_names_.end(), name) != sensitive_names_.end();
}

Dataset Dataset::with_sensitive_column(const std::string& name, std::vector<int> column) const {
    require(!has_sensitive(name), "dataset: sensitive column '" + name + "' already exists");
    auto names = sensitive_names_;
    auto cols = sensitive_columns_;
    names.push_back(name);
    cols.push_back(std::move(column));
    return Dataset(features_, d_, feature_names_, label_, std::move(names), std::move(cols), weights_);
}

Dataset Dataset::with_weights(std::vector<double> weights) const {
    return Dataset(features_, d_, feature_names_, label_, sensitive_names_, sensitive_columns_, std::move(weights));
}

Dataset Dataset::with_features(std::vector<double> features) const {
    require(features.size() == features_.size(), "dataset: replacement features must keep the shape");
    return Dataset(std::move(features), d_, feature_names_, label_, sensitive_names_, sensitive_columns_, weights_);
}

Dataset Dataset::select_rows(const std::vector<std::size_t>& rows) const {
    require(!rows.empty(), "dataset: row selection must be nonempty");
    std::vector<double> feats;
    feats.reserve(rows.size() * d_);
    std::vector<int> lab;
    lab.reserve(rows.size());
    std::vector<double> w;
    w.reserve(rows.size());
    std::vector<std::vector<int>> sens(sensitive_columns_.size());
    for (auto& c : sens) c.reserve(rows.size());
    for (std::size_t i : rows) {
        require(i < n_, "dataset: row index out of range");
        feats.insert(feats.end(), features_.begin() + i * d_, features_.begin() + (i + 1) * d_);
        lab.push_back(label_[i]);
        w.push_back(weights_[i]);
        for (std::size_t k = 0; k < sens.size(); ++k) sens[k].push_back(sensitive_columns_[k][i]);
    }
    return Dataset(std::move(feats), d_, feature_names_, std::move(lab), sensitive_names_, std::move(sens), std::move(w));
}

// ---------------------------------------------------------------------------
// split

namespace {

// Largest-remainder apportionment of `count` rows into three parts.
std::array<std::size_t, 3> apportion(std::size_t count, const std::array<double, 3>& fractions) {
    std::array<std::size_t, 3> out{};
    std::array<double, 3> rem{};
    std::size_t assigned = 0;
    for (int p = 0; p < 3; ++p) {
        const double exact = static_cast<double>(count) * fractions[p];
        out[p] = static_cast<std::size_t>(std::floor(exact + 1e-12));
        rem[p] = exact - static_cast<double>(out[p]);
        assigned += out[p];
    }
    while (assigned < count) {
        int best = 0;
        for (int p = 1; p < 3; ++p) {
            if (rem[p] > rem[best] + 1e-15) best = p;
        }
        ++out[best];
        rem[best] = -1.0;
        ++assigned;
    }
    return out;
}

}  // namespace

SplitResult split(const Dataset& data, double train_fraction, double val_fraction,
                  double test_fraction, std::uint64_t seed) {
    const std::array<double, 3> frac{train_fraction, val_fraction, test_fraction};
    for (double f : frac) {
        if (!(f > 0.0)) throw std::invalid_argument("split: fractions must be positive");
    }
    if (std::abs(frac[0] + frac[1] + frac[2] - 1.0) > 1e-9) {
        throw std::invalid_argument("split: fractions must sum to 1");
    }
    const std::size_t n = data.n();
    if (n < 3) throw std::invalid_argument("split: need at least 3 rows");

    const auto global = apportion(n, frac);
    for (int p = 0; p < 3; ++p) {
        if (global[p] == 0) throw std::invalid_argument("split: too few rows to give every part at least one row");
    }

    // Strata keyed by (label, joined sensitive bits); deterministic ordering.
    std::map<std::uint64_t, std::vector<std::size_t>> strata;
    const auto& names = data.sensitive_names();
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t key = static_cast<std::uint64_t>(data.label()[i]);
        for (const auto& name : names) {
            key = key * 2 + static_cast<std::uint64_t>(data.sensitive(name)[i]);
        }
        strata[key].push_back(i);
    }

    struct Cell {
        std::uint64_t key;
        std::vector<std::size_t> rows;
        std::array<std::size_t, 3> quota;
    };
    std::vector<Cell> cells;
    cells.reserve(strata.size());
    for (auto& [key, rows] : strata) {
        Cell c{key, std::move(rows), {}};
        c.quota = apportion(c.rows.size(), frac);
        // Strata of 3+ rows must be represented in train.
        if (c.rows.size() >= 3 && c.quota[0] == 0) {
            int donor = c.quota[1] >= c.quota[2] ? 1 : 2;
            --c.quota[donor];
            ++c.quota[0];
        }
        cells.push_back(std::move(c));
    }

    // Reconcile per-stratum quotas with the exact global part sizes.
    std::array<long long, 3> delta{};
    for (int p = 0; p < 3; ++p) {
        long long total = 0;
        for (const auto& c : cells) total += static_cast<long long>(c.quota[p]);
        delta[p] = total - static_cast<long long>(global[p]);
    }
    auto can_donate = [](const Cell& c, int p) {
        if (c.quota[p] == 0) return false;
        if (p == 0 && c.rows.size() >= 3 && c.quota[0] <= 1) return false;
        return true;
    };
    for (int guard = 0; guard < static_cast<int>(n) + 8; ++guard) {
        int over = -1, under = -1;
        for (int p = 0; p < 3; ++p) {
            if (delta[p] > 0 && over < 0) over = p;
            if (delta[p] < 0 && under < 0) under = p;
        }
        if (over < 0 || under < 0) break;
        std::size_t pick = cells.size();
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (!can_donate(cells[c], over)) continue;
            if (pick == cells.size() || cells[c].quota[over] > cells[pick].quota[over]) pick = c;
        }
        if (pick == cells.size()) {
            // Relax the train-representation guard as a last resort.
            for (std::size_t c = 0; c < cells.size(); ++c) {
                if (cells[c].quota[over] > 0) { pick = c; break; }
            }
        }
        --cells[pick].quota[over];
        ++cells[pick].quota[under];
        --delta[over];
        ++delta[under];
    }

    std::vector<std::size_t> parts[3];
    for (auto& c : cells) {
        rng::Rng gen(rng::mix_key(seed, 0x73706c6974ULL, c.key));  // "split" tag
        gen.shuffle(c.rows);
        std::size_t pos = 0;
        for (int p = 0; p < 3; ++p) {
            for (std::size_t k = 0; k < c.quota[p]; ++k) parts[p].push_back(c.rows[pos++]);
        }
    }
    for (auto& part : parts) std::sort(part.begin(), part.end());

    return SplitResult{data.select_rows(parts[0]), data.select_rows(parts[1]), data.select_rows(parts[2])};
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

void write_dataset_csv(const Dataset& data, std::ostream& out) {
    for (std::size_t j = 0; j < data.dim(); ++j) {
        if (j) out << ',';
        out << data.feature_names()[j];
    }
    for (const auto& name : data.sensitive_names()) out << ",sens_" << name;
    out << ",label,weight\n";
    for (std::size_t i = 0; i < data.n(); ++i) {
        for (std::size_t j = 0; j < data.dim(); ++j) {
            if (j) out << ',';
            out << format_double(data.feature(i, j));
        }
        for (const auto& name : data.sensitive_names()) out << ',' << data.sensitive(name)[i];
        out << ',' << data.label()[i] << ',' << format_double(data.weights()[i]) << '\n';
    }
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    write_dataset_csv(data, out);
}

Dataset read_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("dataset csv: empty input");
    const auto header = split_line(line);
    if (header.size() < 4) throw DataError("dataset csv: header too short");
    if (header[header.size() - 2] != "label" || header.back() != "weight") {
        throw DataError("dataset csv: header must end with label,weight");
    }
    std::vector<std::string> feature_names;
    std::vector<std::string> sens_names;
    for (std::size_t j = 0; j + 2 < header.size(); ++j) {
        if (header[j].rfind("sens_", 0) == 0) {
            sens_names.push_back(header[j].substr(5));
        } else {
            if (!sens_names.empty()) throw DataError("dataset csv: feature column after sensitive columns");
            feature_names.push_back(header[j]);
        }
    }
    const std::size_t d = feature_names.size();
    const std::size_t s = sens_names.size();
    std::vector<double> feats;
    std::vector<int> label;
    std::vector<double> weights;
    std::vector<std::vector<int>> sens(s);
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() != header.size()) {
            throw DataError("dataset csv: row " + std::to_string(row_no) + " has " +
                            std::to_string(fields.size()) + " fields, expected " + std::to_string(header.size()));
        }
        auto parse_double = [&](const std::string& f) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc() || ptr != f.data() + f.size()) {
                throw DataError("dataset csv: bad numeric field '" + f + "' at row " + std::to_string(row_no));
            }
            return v;
        };
        auto parse_bit = [&](const std::string& f) {
            if (f == "0") return 0;
            if (f == "1") return 1;
            throw DataError("dataset csv: bad binary field '" + f + "' at row " + std::to_string(row_no));
        };
        for (std::size_t j = 0; j < d; ++j) feats.push_back(parse_double(fields[j]));
        for (std::size_t k = 0; k < s; ++k) sens[k].push_back(parse_bit(fields[d + k]));
        label.push_back(parse_bit(fields[d + s]));
        weights.push_back(parse_double(fields[d + s + 1]));
    }
    return Dataset(std::move(feats), d, std::move(feature_names), std::move(label),
                   std::move(sens_names), std::move(sens), std::move(weights));
}

Dataset read_dataset_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    return read_dataset_csv(in);
}

}  // namespace fairbench
