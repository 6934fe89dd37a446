#include "fairbench/logic.hpp"

#include <stdexcept>

namespace fairbench {

LogicalProcessor LogicalProcessor::by_name(const std::string& name) {
    if (name == "or") return {LpKind::kOr, {}};
    if (name == "and") return {LpKind::kAnd, {}};
    if (name == "xor") return {LpKind::kXor, {}};
    if (name == "identity" || name == "none") return {LpKind::kIdentity, {}};
    throw std::invalid_argument("logical processor: unknown kind '" + name + "'");
}

LogicalProcessor LogicalProcessor::custom(std::vector<int> truth_table) {
    std::size_t size = truth_table.size();
    if (size < 2 || (size & (size - 1)) != 0) {
        throw std::invalid_argument("logical processor: custom table length must be a power of two >= 2");
    }
    for (int v : truth_table) {
        if (v != 0 && v != 1) throw std::invalid_argument("logical processor: table entries must be 0 or 1");
    }
    return {LpKind::kCustom, std::move(truth_table)};
}

std::size_t LogicalProcessor::arity() const {
    switch (kind) {
        case LpKind::kIdentity: return 1;
        case LpKind::kCustom: {
            std::size_t k = 0;
            for (std::size_t s = table.size(); s > 1; s >>= 1) ++k;
            return k;
        }
        default: return 2;
    }
}

int LogicalProcessor::apply(const std::vector<int>& bits) const {
    if (bits.size() != arity()) {
        throw std::invalid_argument("logical processor: expected " + std::to_string(arity()) +
                                    " inputs, got " + std::to_string(bits.size()));
    }
    switch (kind) {
        case LpKind::kOr: return bits[0] | bits[1];
        case LpKind::kAnd: return bits[0] & bits[1];
        case LpKind::kXor: return bits[0] ^ bits[1];
        case LpKind::kIdentity: return bits[0];
        case LpKind::kCustom: {
            std::size_t index = 0;
            for (int b : bits) index = index * 2 + static_cast<std::size_t>(b);
            return table[index];
        }
    }
    throw std::logic_error("logical processor: unreachable");
}

std::string LogicalProcessor::name() const {
    switch (kind) {
        case LpKind::kOr: return "or";
        case LpKind::kAnd: return "and";
        case LpKind::kXor: return "xor";
        case LpKind::kIdentity: return "identity";
        case LpKind::kCustom: return "custom";
    }
    return "unknown";
}

Dataset apply_lp(const LogicalProcessor& lp, const Dataset& data,
                 const std::vector<std::string>& columns) {
    if (columns.size() != lp.arity()) {
        throw std::invalid_argument("apply_lp: processor arity " + std::to_string(lp.arity()) +
                                    " does not match " + std::to_string(columns.size()) + " columns");
    }
    std::vector<const std::vector<int>*> cols;
    cols.reserve(columns.size());
    for (const auto& name : columns) cols.push_back(&data.sensitive(name));

    if (lp.kind == LpKind::kIdentity) return data;  // the column is already present

    std::vector<int> combined(data.n());
    std::vector<int> bits(columns.size());
    for (std::size_t i = 0; i < data.n(); ++i) {
        for (std::size_t k = 0; k < cols.size(); ++k) bits[k] = (*cols[k])[i];
        combined[i] = lp.apply(bits);
    }
    return data.with_sensitive_column(lp.name(), std::move(combined));
}

LpRates lp_rates(const Dataset& data, const std::vector<std::string>& columns) {
    if (columns.size() != 2) throw std::invalid_argument("lp_rates: exactly two columns required");
    const auto& c1 = data.sensitive(columns[0]);
    const auto& c2 = data.sensitive(columns[1]);
    const auto& w = data.weights();
    double total = 0.0;
    LpRates r;
    for (std::size_t i = 0; i < data.n(); ++i) {
        total += w[i];
        if (c1[i] & c2[i]) r.and_rate += w[i];
        if (c1[i] ^ c2[i]) r.xor_rate += w[i];
    }
    r.and_rate /= total;
    r.xor_rate /= total;
    // Row-wise, the OR indicator is the sum of the AND and XOR indicators;
    // deriving the rate keeps the identity exact in floating point.
    r.or_rate = r.and_rate + r.xor_rate;
    return r;
}

}  // namespace fairbench
