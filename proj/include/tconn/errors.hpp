#pragma once

#include <stdexcept>
#include <string>

namespace tconn {

// Every failure mode carries a stable machine-readable code (used verbatim
// in CLI error reports) plus a human message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define TCONN_ERROR(Name, code_str)                                   \
    class Name : public Error {                                       \
    public:                                                           \
        explicit Name(const std::string& what = code_str)             \
            : Error(code_str, what) {}                                 \
    }

TCONN_ERROR(DivByZero, "div_by_zero");
TCONN_ERROR(NotASquareInField, "not_a_square_in_field");
TCONN_ERROR(RootNotInField, "root_not_in_field");
TCONN_ERROR(OrderMismatch, "order_mismatch");
TCONN_ERROR(IndexError, "index_error");
TCONN_ERROR(NotComposable, "not_composable");
TCONN_ERROR(NotInvertible, "not_invertible");
TCONN_ERROR(NotAUnit, "not_a_unit");
TCONN_ERROR(NoFormalSolution, "no_formal_solution");
TCONN_ERROR(BadInitialData, "bad_initial_data");
TCONN_ERROR(BadParameter, "bad_parameter");
TCONN_ERROR(ZeroInput, "zero_input");
TCONN_ERROR(WrongGerm, "wrong_germ");
TCONN_ERROR(NoUnfolding, "no_unfolding");
TCONN_ERROR(NotFramed, "not_framed");
TCONN_ERROR(BadForm, "bad_form");
TCONN_ERROR(BadInput, "bad_input");
TCONN_ERROR(BadCase, "bad_case");
TCONN_ERROR(NotAnAutomorphism, "not_an_automorphism");
TCONN_ERROR(NotComparable, "not_comparable");
TCONN_ERROR(NotFlat, "not_flat");
TCONN_ERROR(SchemaError, "schema_error");

#undef TCONN_ERROR

// Raised when a t2-power division hits a nonzero low coefficient.
class NotDivisible : public Error {
public:
    NotDivisible(int degree, const std::string& coeff)
        : Error("not_divisible",
                "coefficient of t2^" + std::to_string(degree) +
                    " is nonzero: " + coeff),
          degree_(degree) {}
    int degree() const noexcept { return degree_; }

private:
    int degree_;
};

}  // namespace tconn
