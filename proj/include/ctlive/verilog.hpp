#pragma once

// Parser and translator for a synthesizable Verilog subset: single clock,
// no delays, no initial blocks, no generate, no parameters.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ctlive/error.hpp"
#include "ctlive/ir.hpp"

namespace ctlive::verilog {

enum class Direction { None, Input, Output, Inout };

struct Decl {
    std::string name;
    Direction direction = Direction::None;
    StorageClass storage = StorageClass::Wire;
    unsigned width = 1;
    /// Index of the least significant bit in the declared range.
    int64_t lsb = 0;
    SourceSpan span;
};

struct VStmt {
    enum class Kind { Null, Block, Assign, If, Case };
    Kind kind = Kind::Null;
    bool blocking = true;
    std::string lhs;
    /// Assign: right-hand side. If/Case: condition or selector.
    Expr expr;
    /// Block: statements. If: {then, else?}.
    std::vector<VStmt> body;
    struct CaseItem {
        /// Empty for the default item.
        std::vector<Expr> labels;
        std::vector<VStmt> body;  // exactly one statement
    };
    std::vector<CaseItem> items;
    SourceSpan span;
};

enum class Sensitivity { Clocked, Combinational };

struct Connection {
    /// Empty for positional connections.
    std::string port;
    Expr expr;
    bool connected = true;
    SourceSpan span;
};

struct Item {
    enum class Kind { Always, Assign, Instance };
    Kind kind = Kind::Always;
    Sensitivity sensitivity = Sensitivity::Clocked;
    VStmt body;
    std::string lhs;
    Expr rhs;
    std::string module;
    std::string instance;
    std::vector<Connection> connections;
    SourceSpan span;
};

struct Annotation {
    enum class Kind { Source, Sink, Assume, InitEq, AlwaysEq };
    Kind kind;
    std::string var;
    uint64_t value = 0;
    SourceSpan span;
};

struct Module {
    std::string name;
    /// Port names in declaration order.
    std::vector<std::string> ports;
    /// Ports and internal signals, in declaration order.
    std::vector<Decl> decls;
    std::vector<Item> items;
    std::vector<Annotation> annotations;
    SourceSpan span;

    const Decl* find(const std::string& name) const;
};

std::vector<Module> parse_verilog(const std::string& text, const std::string& filename = "<input>");

/// Extracts annotations written as `source(x); assume(x = 1); ...` from text.
std::vector<Annotation> parse_annotations(const std::string& text, const std::string& filename = "<annot>");

/// Inlines instances below `top`, desugars case statements and drops edge
/// information. An empty top selects the single uninstantiated module.
Module normalize(const std::vector<Module>& modules, const std::string& top = "");

std::pair<Program, AnnotationSet> translate(const Module& flat);

/// Adds annotations to a set; assumptions on a variable replace earlier
/// constant assumptions on the same variable when `override_assumes` is set.
void apply_annotations(AnnotationSet& set, const std::vector<Annotation>& annots, bool override_assumes);

/// parse, normalize and translate in one go.
std::pair<Program, AnnotationSet> load(const std::vector<std::pair<std::string, std::string>>& files,
                                       const std::string& top = "");

}  // namespace ctlive::verilog
