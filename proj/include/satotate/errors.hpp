#pragma once

#include <stdexcept>
#include <string>

namespace satotate {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or unsupported user input (curve strings, endo files, moduli).
/// CLI maps these to exit code 2.
class invalid_input_error : public error {
public:
    using error::error;
};

class invalid_modulus_error : public invalid_input_error {
public:
    using invalid_input_error::invalid_input_error;
};

class incompatible_field_error : public invalid_input_error {
public:
    using invalid_input_error::invalid_input_error;
};

class bad_reduction_error : public invalid_input_error {
public:
    using invalid_input_error::invalid_input_error;
};

class invalid_curve_error : public invalid_input_error {
public:
    using invalid_input_error::invalid_input_error;
};

class unsupported_genus_error : public invalid_input_error {
public:
    using invalid_input_error::invalid_input_error;
};

class invalid_endo_error : public invalid_input_error {
public:
    using invalid_input_error::invalid_input_error;
};

class unknown_element_error : public invalid_input_error {
public:
    using invalid_input_error::invalid_input_error;
};

class not_a_subgroup_error : public invalid_input_error {
public:
    using invalid_input_error::invalid_input_error;
};

class invalid_galois_error : public invalid_input_error {
public:
    using invalid_input_error::invalid_input_error;
};

/// Raised when the computed centralizer dimension matches no catalog entry.
class unknown_component_error : public invalid_input_error {
public:
    unknown_component_error(const std::string& msg, int lie_dim)
        : invalid_input_error(msg), lie_dim(lie_dim) {}
    int lie_dim;
};

class embedding_error : public invalid_input_error {
public:
    using invalid_input_error::invalid_input_error;
};

class incomplete_rule_error : public invalid_input_error {
public:
    using invalid_input_error::invalid_input_error;
};

class empty_sample_error : public invalid_input_error {
public:
    using invalid_input_error::invalid_input_error;
};

/// Not enough data points to run a statistical comparison.
/// CLI maps this to exit code 3.
class insufficient_data_error : public error {
public:
    using error::error;
};

/// Internal invariant violation (e.g. parity failure when assembling a
/// genus-2 Frobenius polynomial). CLI maps this to exit code 4.
class inconsistency_error : public error {
public:
    using error::error;
};

}  // namespace satotate
