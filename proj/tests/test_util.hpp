#ifndef RECOVGRAPH_TESTS_TEST_UTIL_HPP
#define RECOVGRAPH_TESTS_TEST_UTIL_HPP

#include <Eigen/Core>

namespace testutil {

/// Bit-exact equality for Eigen matrices.
template <typename A, typename B>
bool exact_equal(const A& a, const B& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    return (a.array() == b.array()).all();
}

} // namespace testutil

#endif
