#pragma once

// Textual form of the intermediate representation. The grammar is documented
// in docs/ir-format.md; printing is canonical so that print(parse(print(p)))
// reproduces the same bytes.

#include <string>
#include <utility>

#include "ctlive/ir.hpp"

namespace ctlive {

std::string print_expr(const Expr& e);
std::string print_formula(const Formula& f);
std::string print_stmt(const Stmt& s, int indent = 0);
std::string print_program(const Program& program, const AnnotationSet& annots);

Expr parse_expr(const std::string& text);
Formula parse_formula(const std::string& text);
std::pair<Program, AnnotationSet> parse_program(const std::string& text, const std::string& filename = "<ir>");

}  // namespace ctlive
