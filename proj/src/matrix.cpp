#include "lobcast/matrix.hpp"

#include "lobcast/error.hpp"

#include <algorithm>

namespace lobcast {

Matrix Matrix::slice_rows(std::size_t begin, std::size_t end) const {
    if (begin > end || end > rows) throw Error(ErrorKind::IndexOutOfRange, "slice_rows out of range");
    Matrix out(end - begin, cols);
    std::copy(data.begin() + static_cast<std::ptrdiff_t>(begin * cols),
              data.begin() + static_cast<std::ptrdiff_t>(end * cols), out.data.begin());
    return out;
}

Tensor Matrix::to_tensor(bool requires_grad) const { return Tensor(Shape{rows, cols}, data, requires_grad); }

Matrix Matrix::from_tensor(const Tensor& t) {
    if (t.rank() != 2) throw Error(ErrorKind::ShapeMismatch, "Matrix::from_tensor needs rank 2");
    Matrix m(t.dim(0), t.dim(1));
    std::copy(t.values().begin(), t.values().end(), m.data.begin());
    return m;
}

}  // namespace lobcast
