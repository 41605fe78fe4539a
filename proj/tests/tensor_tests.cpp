#include <doctest.h>

#include <stdexcept>

#include "dtc/tensor.hpp"

using dtc::Parameter;
using dtc::Tensor;

TEST_CASE("tensor shape bookkeeping") {
    Tensor t({3, 4});
    CHECK(t.ndim() == 2);
    CHECK(t.size() == 12);
    CHECK(t.rows() == 3);
    CHECK(t.cols() == 4);
    CHECK(t.dim(0) == 3);
    CHECK(t.dim(1) == 4);
    CHECK(t.shape_string() == "[3x4]");
    for (double v : t.span()) CHECK(v == 0.0);
}

TEST_CASE("tensor row-major 2d addressing") {
    Tensor t({2, 3});
    t.at(0, 0) = 1.0;
    t.at(0, 2) = 2.0;
    t.at(1, 1) = 3.0;
    CHECK(t[0] == 1.0);
    CHECK(t[2] == 2.0);
    CHECK(t[4] == 3.0);
}

TEST_CASE("tensor data/shape mismatch is rejected") {
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), std::invalid_argument);
    CHECK_THROWS_AS(Tensor({0, 2}), std::invalid_argument);
}

TEST_CASE("tensor construction from data") {
    Tensor t({2, 2}, {1.0, 2.0, 3.0, 4.0});
    CHECK(t.at(1, 0) == 3.0);
    CHECK(t.same_shape(Tensor({2, 2})));
    CHECK_FALSE(t.same_shape(Tensor({4})));
}

TEST_CASE("all_finite flags NaN and infinity") {
    Tensor t({3});
    CHECK(t.all_finite());
    t[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(t.all_finite());
    t[1] = std::numeric_limits<double>::infinity();
    CHECK_FALSE(t.all_finite());
}

TEST_CASE("parameter carries a same-shape gradient") {
    Parameter p(Tensor({2, 3}, {1, 2, 3, 4, 5, 6}));
    CHECK(p.grad.same_shape(p.value));
    CHECK(p.size() == 6);
    p.grad.fill(2.5);
    p.zero_grad();
    for (double g : p.grad.span()) CHECK(g == 0.0);
}

TEST_CASE("check_same_shape reports both shapes") {
    Tensor a({2, 2});
    Tensor b({4});
    CHECK_NOTHROW(dtc::check_same_shape(a, a, "test"));
    CHECK_THROWS_WITH_AS(dtc::check_same_shape(a, b, "test"),
                         "test: shape mismatch [2x2] vs [4]", std::invalid_argument);
}
