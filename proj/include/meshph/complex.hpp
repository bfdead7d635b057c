#ifndef MESHPH_COMPLEX_HPP
#define MESHPH_COMPLEX_HPP

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace meshph {

/// Sparse signed (+-1) incidence matrix mapping k-cochains to (k+1)-cochains.
///
/// Storage is compressed-row with a mirrored compressed-column layout built
/// once at construction, so apply() and apply_transpose() both run in O(nnz)
/// with a fixed deterministic summation order. Signs are kept as 8-bit
/// integers; the chain property D_{k+1} D_k = 0 is checked in exact integer
/// arithmetic.
class SignedIncidence {
public:
    struct Entry {
        int row;
        int col;
        std::int8_t sign; // -1 or +1
    };

    SignedIncidence() = default;
    SignedIncidence(int rows, int cols, std::vector<Entry> entries);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t nnz() const { return entries_.size(); }
    std::span<const Entry> entries() const { return entries_; }
    /// [row_begin, row_end) index the entries() slice of one row.
    std::size_t row_begin(int row) const { return static_cast<std::size_t>(row_ptr_[row]); }
    std::size_t row_end(int row) const { return static_cast<std::size_t>(row_ptr_[row + 1]); }

    /// y[r] = sum_c sign(r,c) * x[c]
    void apply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> apply(std::span<const double> x) const;

    /// x[c] = sum_r sign(r,c) * y[r]
    void apply_transpose(std::span<const double> y, std::span<double> x) const;
    std::vector<double> apply_transpose(std::span<const double> y) const;

    /// Integer matrix product (this * other), dense int64. Used for chain checks.
    std::vector<std::vector<std::int64_t>> integer_product(const SignedIncidence& other) const;

    /// Scale row r by s[r] (entries of s are +-1).
    SignedIncidence scale_rows(std::span<const std::int8_t> s) const;
    /// Scale column c by s[c].
    SignedIncidence scale_cols(std::span<const std::int8_t> s) const;
    /// Relabel rows: new row of entry = perm[old row].
    SignedIncidence permute_rows(std::span<const int> perm) const;
    /// Relabel columns: new col of entry = perm[old col].
    SignedIncidence permute_cols(std::span<const int> perm) const;

    bool operator==(const SignedIncidence& other) const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<Entry> entries_;      // sorted by (row, col)
    std::vector<int> row_ptr_;        // CSR over entries_
    std::vector<int> col_ptr_;        // CSC mirror
    std::vector<int> csc_entry_;      // index into entries_ per CSC slot
};

/// +-1 sign vector over the cells of one degree.
struct OrientationGauge {
    int degree = 0;
    std::vector<std::int8_t> signs;
};

/// Oriented cell complex of dimension d: cell counts n_0..n_d and incidence
/// operators D_0..D_{d-1} with D_{k+1} D_k = 0 exactly.
class CellComplex {
public:
    CellComplex() = default;
    CellComplex(std::vector<int> cell_counts, std::vector<SignedIncidence> incidences);

    int dimension() const { return static_cast<int>(cell_counts_.size()) - 1; }
    int count(int degree) const { return cell_counts_.at(degree); }
    const std::vector<int>& counts() const { return cell_counts_; }
    const SignedIncidence& incidence(int degree) const { return incidences_.at(degree); }
    int num_incidences() const { return static_cast<int>(incidences_.size()); }

    bool operator==(const CellComplex& other) const;

private:
    std::vector<int> cell_counts_;
    std::vector<SignedIncidence> incidences_;
};

/// Assemble a 2D complex from oriented boundary lists.
/// Edges are (tail, head) node pairs; faces are cycles of (edge, sign) with
/// sign +1 when the face traverses the edge tail->head.
CellComplex build_complex(int n_nodes,
                          const std::vector<std::pair<int, int>>& edges,
                          const std::vector<std::vector<std::pair<int, int>>>& faces = {});

/// Verify D_{k+1} D_k = 0 in integer arithmetic; throws ChainViolation.
void check_chain_property(const CellComplex& complex);

/// Scale the orientation of the degree-k cells: column c of D_k and row c of
/// D_{k-1} are multiplied by g.signs[c]. Chain property is preserved.
CellComplex flip_orientation(const CellComplex& complex, const OrientationGauge& gauge);

/// Relabel the degree-k cells: cell i becomes cell perm[i].
CellComplex permute_cells(const CellComplex& complex, int degree, std::span<const int> perm);

std::string complex_to_json(const CellComplex& complex);
CellComplex complex_from_json(const std::string& text);

} // namespace meshph

#endif
