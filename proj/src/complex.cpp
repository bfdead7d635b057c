#include "meshph/complex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "meshph/errors.hpp"
#include "json.hpp"

namespace meshph {

SignedIncidence::SignedIncidence(int rows, int cols, std::vector<Entry> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (rows < 0 || cols < 0)
        throw DimensionMismatch("SignedIncidence: negative dimension");
    for (const Entry& e : entries_) {
        if (e.row < 0 || e.row >= rows_ || e.col < 0 || e.col >= cols_)
            throw BadReference("SignedIncidence entry out of range");
        if (e.sign != 1 && e.sign != -1)
            throw Error("SignedIncidence entry sign must be +-1");
    }
    std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        if (entries_[i].row == entries_[i - 1].row && entries_[i].col == entries_[i - 1].col)
            throw Error("SignedIncidence: duplicate (row, col) entry");
    }

    row_ptr_.assign(static_cast<std::size_t>(rows_) + 1, 0);
    for (const Entry& e : entries_) ++row_ptr_[static_cast<std::size_t>(e.row) + 1];
    for (int r = 0; r < rows_; ++r) row_ptr_[r + 1] += row_ptr_[r];

    // column mirror, entries referenced by index so signs live in one place
    col_ptr_.assign(static_cast<std::size_t>(cols_) + 1, 0);
    for (const Entry& e : entries_) ++col_ptr_[static_cast<std::size_t>(e.col) + 1];
    for (int c = 0; c < cols_; ++c) col_ptr_[c + 1] += col_ptr_[c];
    csc_entry_.resize(entries_.size());
    std::vector<int> cursor(col_ptr_.begin(), col_ptr_.end() - 1);
    for (std::size_t i = 0; i < entries_.size(); ++i)
        csc_entry_[static_cast<std::size_t>(cursor[entries_[i].col]++)] = static_cast<int>(i);
}

void SignedIncidence::apply(std::span<const double> x, std::span<double> y) const {
    if (static_cast<int>(x.size()) != cols_ || static_cast<int>(y.size()) != rows_)
        throw DimensionMismatch("SignedIncidence::apply: size mismatch");
    for (int r = 0; r < rows_; ++r) {
        double acc = 0.0;
        for (int i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i) {
            const Entry& e = entries_[static_cast<std::size_t>(i)];
            acc += e.sign > 0 ? x[static_cast<std::size_t>(e.col)]
                              : -x[static_cast<std::size_t>(e.col)];
        }
        y[static_cast<std::size_t>(r)] = acc;
    }
}

std::vector<double> SignedIncidence::apply(std::span<const double> x) const {
    std::vector<double> y(static_cast<std::size_t>(rows_));
    apply(x, y);
    return y;
}

void SignedIncidence::apply_transpose(std::span<const double> y, std::span<double> x) const {
    if (static_cast<int>(y.size()) != rows_ || static_cast<int>(x.size()) != cols_)
        throw DimensionMismatch("SignedIncidence::apply_transpose: size mismatch");
    for (int c = 0; c < cols_; ++c) {
        double acc = 0.0;
        for (int i = col_ptr_[c]; i < col_ptr_[c + 1]; ++i) {
            const Entry& e = entries_[static_cast<std::size_t>(csc_entry_[i])];
            acc += e.sign > 0 ? y[static_cast<std::size_t>(e.row)]
                              : -y[static_cast<std::size_t>(e.row)];
        }
        x[static_cast<std::size_t>(c)] = acc;
    }
}

std::vector<double> SignedIncidence::apply_transpose(std::span<const double> y) const {
    std::vector<double> x(static_cast<std::size_t>(cols_));
    apply_transpose(y, x);
    return x;
}

std::vector<std::vector<std::int64_t>>
SignedIncidence::integer_product(const SignedIncidence& other) const {
    if (cols_ != other.rows_)
        throw DimensionMismatch("integer_product: inner dimensions differ");
    std::vector<std::vector<std::int64_t>> out(
        static_cast<std::size_t>(rows_),
        std::vector<std::int64_t>(static_cast<std::size_t>(other.cols_), 0));
    for (const Entry& a : entries_) {
        for (int i = other.row_ptr_[a.col]; i < other.row_ptr_[a.col + 1]; ++i) {
            const Entry& b = other.entries_[static_cast<std::size_t>(i)];
            out[static_cast<std::size_t>(a.row)][static_cast<std::size_t>(b.col)] +=
                static_cast<std::int64_t>(a.sign) * b.sign;
        }
    }
    return out;
}

namespace {

std::int8_t flipped(std::int8_t sign, std::int8_t factor) {
    return static_cast<std::int8_t>(sign * factor);
}

} // namespace

SignedIncidence SignedIncidence::scale_rows(std::span<const std::int8_t> s) const {
    if (static_cast<int>(s.size()) != rows_)
        throw DimensionMismatch("scale_rows: sign vector length");
    std::vector<Entry> out = entries_;
    for (Entry& e : out) e.sign = flipped(e.sign, s[static_cast<std::size_t>(e.row)]);
    return SignedIncidence(rows_, cols_, std::move(out));
}

SignedIncidence SignedIncidence::scale_cols(std::span<const std::int8_t> s) const {
    if (static_cast<int>(s.size()) != cols_)
        throw DimensionMismatch("scale_cols: sign vector length");
    std::vector<Entry> out = entries_;
    for (Entry& e : out) e.sign = flipped(e.sign, s[static_cast<std::size_t>(e.col)]);
    return SignedIncidence(rows_, cols_, std::move(out));
}

SignedIncidence SignedIncidence::permute_rows(std::span<const int> perm) const {
    if (static_cast<int>(perm.size()) != rows_)
        throw NotAPermutation("permute_rows: length mismatch");
    std::vector<Entry> out = entries_;
    for (Entry& e : out) e.row = perm[static_cast<std::size_t>(e.row)];
    return SignedIncidence(rows_, cols_, std::move(out));
}

SignedIncidence SignedIncidence::permute_cols(std::span<const int> perm) const {
    if (static_cast<int>(perm.size()) != cols_)
        throw NotAPermutation("permute_cols: length mismatch");
    std::vector<Entry> out = entries_;
    for (Entry& e : out) e.col = perm[static_cast<std::size_t>(e.col)];
    return SignedIncidence(rows_, cols_, std::move(out));
}

bool SignedIncidence::operator==(const SignedIncidence& other) const {
    if (rows_ != other.rows_ || cols_ != other.cols_) return false;
    if (entries_.size() != other.entries_.size()) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].row != other.entries_[i].row || entries_[i].col != other.entries_[i].col ||
            entries_[i].sign != other.entries_[i].sign)
            return false;
    }
    return true;
}

CellComplex::CellComplex(std::vector<int> cell_counts, std::vector<SignedIncidence> incidences)
    : cell_counts_(std::move(cell_counts)), incidences_(std::move(incidences)) {
    if (cell_counts_.empty()) throw DimensionMismatch("CellComplex: no cell counts");
    if (incidences_.size() + 1 != cell_counts_.size())
        throw DimensionMismatch("CellComplex: need one incidence per adjacent degree pair");
    for (std::size_t k = 0; k < incidences_.size(); ++k) {
        if (incidences_[k].cols() != cell_counts_[k] || incidences_[k].rows() != cell_counts_[k + 1])
            throw DimensionMismatch("CellComplex: incidence dimensions do not chain");
    }
    check_chain_property(*this);
}

bool CellComplex::operator==(const CellComplex& other) const {
    return cell_counts_ == other.cell_counts_ && incidences_ == other.incidences_;
}

CellComplex build_complex(int n_nodes,
                          const std::vector<std::pair<int, int>>& edges,
                          const std::vector<std::vector<std::pair<int, int>>>& faces) {
    if (n_nodes < 0) throw BadReference("build_complex: negative node count");
    std::vector<SignedIncidence::Entry> d0_entries;
    d0_entries.reserve(edges.size() * 2);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto [tail, head] = edges[e];
        if (tail < 0 || tail >= n_nodes || head < 0 || head >= n_nodes)
            throw BadReference("build_complex: edge endpoint out of range");
        if (tail == head) throw DegenerateCell("build_complex: edge tail equals head");
        d0_entries.push_back({static_cast<int>(e), tail, -1});
        d0_entries.push_back({static_cast<int>(e), head, +1});
    }
    SignedIncidence d0(static_cast<int>(edges.size()), n_nodes, std::move(d0_entries));

    std::vector<int> counts = {n_nodes, static_cast<int>(edges.size())};
    std::vector<SignedIncidence> incidences;
    incidences.push_back(std::move(d0));

    if (!faces.empty()) {
        std::vector<SignedIncidence::Entry> d1_entries;
        for (std::size_t f = 0; f < faces.size(); ++f) {
            for (const auto& [edge, sign] : faces[f]) {
                if (edge < 0 || edge >= static_cast<int>(edges.size()))
                    throw BadReference("build_complex: face references unknown edge");
                if (sign != 1 && sign != -1)
                    throw Error("build_complex: face boundary sign must be +-1");
                d1_entries.push_back({static_cast<int>(f), edge, static_cast<std::int8_t>(sign)});
            }
        }
        incidences.emplace_back(static_cast<int>(faces.size()), static_cast<int>(edges.size()),
                                std::move(d1_entries));
        counts.push_back(static_cast<int>(faces.size()));
    }
    return CellComplex(std::move(counts), std::move(incidences));
}

void check_chain_property(const CellComplex& complex) {
    // row-sparse product: never materializes the dense chain matrix
    for (int k = 0; k + 1 < complex.num_incidences(); ++k) {
        const SignedIncidence& high = complex.incidence(k + 1);
        const SignedIncidence& low = complex.incidence(k);
        const auto low_entries = low.entries();
        std::vector<std::int64_t> acc(static_cast<std::size_t>(low.cols()), 0);
        std::vector<char> marked(static_cast<std::size_t>(low.cols()), 0);
        std::vector<int> touched;
        int current_row = -1;
        auto flush = [&] {
            for (int col : touched) {
                if (acc[static_cast<std::size_t>(col)] != 0)
                    throw ChainViolation("D_{k+1} D_k != 0");
                acc[static_cast<std::size_t>(col)] = 0;
                marked[static_cast<std::size_t>(col)] = 0;
            }
            touched.clear();
        };
        for (const auto& he : high.entries()) {
            if (he.row != current_row) {
                flush();
                current_row = he.row;
            }
            for (std::size_t i = low.row_begin(he.col); i < low.row_end(he.col); ++i) {
                const auto& le = low_entries[i];
                if (!marked[static_cast<std::size_t>(le.col)]) {
                    marked[static_cast<std::size_t>(le.col)] = 1;
                    touched.push_back(le.col);
                }
                acc[static_cast<std::size_t>(le.col)] +=
                    static_cast<std::int64_t>(he.sign) * le.sign;
            }
        }
        flush();
    }
}

CellComplex flip_orientation(const CellComplex& complex, const OrientationGauge& gauge) {
    const int k = gauge.degree;
    if (k < 0 || k > complex.dimension())
        throw DimensionMismatch("flip_orientation: bad degree");
    if (static_cast<int>(gauge.signs.size()) != complex.count(k))
        throw DimensionMismatch("flip_orientation: gauge length mismatch");
    for (std::int8_t s : gauge.signs)
        if (s != 1 && s != -1) throw Error("flip_orientation: gauge entries must be +-1");

    std::vector<SignedIncidence> incidences;
    for (int j = 0; j < complex.num_incidences(); ++j) {
        if (j == k)
            incidences.push_back(complex.incidence(j).scale_cols(gauge.signs));
        else if (j == k - 1)
            incidences.push_back(complex.incidence(j).scale_rows(gauge.signs));
        else
            incidences.push_back(complex.incidence(j));
    }
    return CellComplex(complex.counts(), std::move(incidences));
}

CellComplex permute_cells(const CellComplex& complex, int degree, std::span<const int> perm) {
    if (degree < 0 || degree > complex.dimension())
        throw DimensionMismatch("permute_cells: bad degree");
    const int n = complex.count(degree);
    if (static_cast<int>(perm.size()) != n)
        throw NotAPermutation("permute_cells: length mismatch");
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (int p : perm) {
        if (p < 0 || p >= n || seen[static_cast<std::size_t>(p)])
            throw NotAPermutation("permute_cells: not a bijection");
        seen[static_cast<std::size_t>(p)] = 1;
    }

    std::vector<SignedIncidence> incidences;
    for (int j = 0; j < complex.num_incidences(); ++j) {
        if (j == degree)
            incidences.push_back(complex.incidence(j).permute_cols(perm));
        else if (j == degree - 1)
            incidences.push_back(complex.incidence(j).permute_rows(perm));
        else
            incidences.push_back(complex.incidence(j));
    }
    return CellComplex(complex.counts(), std::move(incidences));
}

std::string complex_to_json(const CellComplex& complex) {
    nlohmann::json j;
    j["n"] = complex.counts();
    nlohmann::json ds = nlohmann::json::array();
    for (int k = 0; k < complex.num_incidences(); ++k) {
        const SignedIncidence& d = complex.incidence(k);
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& e : d.entries())
            entries.push_back({e.row, e.col, static_cast<int>(e.sign)});
        ds.push_back({{"rows", d.rows()}, {"cols", d.cols()}, {"entries", entries}});
    }
    j["D"] = ds;
    return j.dump();
}

CellComplex complex_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    std::vector<int> counts = j.at("n").get<std::vector<int>>();
    std::vector<SignedIncidence> incidences;
    for (const auto& dj : j.at("D")) {
        std::vector<SignedIncidence::Entry> entries;
        for (const auto& ej : dj.at("entries"))
            entries.push_back({ej.at(0).get<int>(), ej.at(1).get<int>(),
                               static_cast<std::int8_t>(ej.at(2).get<int>())});
        incidences.emplace_back(dj.at("rows").get<int>(), dj.at("cols").get<int>(),
                                std::move(entries));
    }
    return CellComplex(std::move(counts), std::move(incidences));
}

} // namespace meshph
