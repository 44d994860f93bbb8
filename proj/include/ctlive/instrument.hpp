#pragma once

// Liveness monitor injection and the lock-step two-copy product.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ctlive/ir.hpp"

namespace ctlive {

/// "live$x".
std::string shadow_name(const std::string& var);
/// "x$L" / "x$R".
std::string side_name(const std::string& var, Side side);

struct InstrumentedProgram {
    Program original;
    /// Original variables plus one shadow per variable.
    Program program;
    AnnotationSet annots;
    /// Original variable -> shadow.
    std::map<std::string, std::string> shadow;
};

/// After every assignment x := e under guards g1..gm, adds an assignment of
/// the same kind live$x := live(e) || live(g1) || ... || live(gm), where
/// live(e) joins the shadows of e's free variables. Shadows share the
/// storage class of their variable and are one bit wide.
InstrumentedProgram instrument(const Program& program, const AnnotationSet& annots);

struct ProductProgram {
    /// Variables of the instrumented program doubled into x$L and x$R.
    Program program;
    InstrumentedProgram base;
    /// Instrumented variable -> its copy on each side.
    std::map<std::string, std::string> left, right;
    /// Original sources and sinks.
    std::vector<std::string> sources, sinks;
    /// Obligations over the original variable names.
    std::vector<Formula> init;
    std::vector<Formula> channel;
    /// One (live$s$L, live$s$R) pair per sink.
    std::vector<std::pair<std::string, std::string>> assertions;

    /// Sources and sinks of both copies, for running the product directly.
    AnnotationSet product_annotations() const;
};

/// Each process keeps its id; its top-level statements are interleaved as
/// s1 on L, s1 on R, s2 on L, s2 on R and so on.
ProductProgram build_product(const InstrumentedProgram& ip, const AnnotationSet& annots);

/// A relational formula as a one-bit expression over product variables.
Expr product_expr(const Formula& f);

}  // namespace ctlive
