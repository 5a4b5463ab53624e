#pragma once

// MIR-like package representation loaded from JSON documents.
//
// A package holds functions (locals, basic blocks, statements, terminators),
// aggregate definitions and trait declarations. Local 0 is the return slot;
// parameters occupy the next consecutive ids. Conversions appear as
// cast_ptr_to_ptr / transmute rvalues carrying explicit src/dst descriptors.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace typesift {

using LocalId = std::uint32_t;
using BlockId = std::uint32_t;

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

struct TypeDescriptor {
  enum class Kind {
    primitive,    // closed set: bool, char, str, u8..u128, i8..i128, usize, isize, f32, f64
    raw_pointer,  // *const T / *mut T
    reference,    // &T / &mut T
    slice,        // [T]
    array,        // [T; N]
    aggregate,    // named struct, resolved through the package table
    generic,      // type parameter, named
    opaque,       // external or unknown type, identified by symbol
  };

  Kind kind = Kind::primitive;
  std::string name;  // primitive/aggregate/generic name, or opaque symbol
  bool is_mut = false;  // raw_pointer and reference only
  std::shared_ptr<const TypeDescriptor> inner;  // pointee or element
  std::uint64_t length = 0;  // array only

  static TypeDescriptor primitive(std::string n);
  static TypeDescriptor raw_pointer(TypeDescriptor pointee, bool is_mut);
  static TypeDescriptor reference(TypeDescriptor pointee, bool is_mut);
  static TypeDescriptor slice(TypeDescriptor element);
  static TypeDescriptor array(TypeDescriptor element, std::uint64_t len);
  static TypeDescriptor aggregate(std::string n);
  static TypeDescriptor generic(std::string n);
  static TypeDescriptor opaque(std::string symbol);

  bool is_pointer_like() const {
    return kind == Kind::raw_pointer || kind == Kind::reference;
  }
  bool has_inner() const {
    return kind == Kind::raw_pointer || kind == Kind::reference ||
           kind == Kind::slice || kind == Kind::array;
  }
  // The pointee for pointers/references, the descriptor itself otherwise.
  const TypeDescriptor& pointee_or_self() const;
  // True when a generic parameter occurs anywhere in the descriptor tree.
  bool contains_generic() const;
  // Rust-flavoured rendering: "*mut u8", "&str", "[u32; 4]", "Table", ...
  std::string canonical() const;
};

bool operator==(const TypeDescriptor& a, const TypeDescriptor& b);
inline bool operator!=(const TypeDescriptor& a, const TypeDescriptor& b) {
  return !(a == b);
}
// Ordering by canonical rendering; used for deterministic sets and witnesses.
bool operator<(const TypeDescriptor& a, const TypeDescriptor& b);

// ---------------------------------------------------------------------------
// Statements and terminators
// ---------------------------------------------------------------------------

struct Place {
  LocalId local = 0;
  bool deref = false;
};

enum class OperandMode { move_, copy_, constant };

struct Operand {
  OperandMode mode = OperandMode::copy_;
  std::optional<Place> place;  // absent for constants
};

struct Rvalue {
  enum class Kind { ref_of, raw_ptr_of, cast_ptr_to_ptr, transmute, use_of };
  Kind kind = Kind::use_of;
  Operand operand;
  bool is_mut = false;  // ref_of / raw_ptr_of
  std::optional<TypeDescriptor> src_type;  // cast_ptr_to_ptr / transmute
  std::optional<TypeDescriptor> dst_type;
};

struct Statement {
  enum class Kind { assign, storage_dead };
  Kind kind = Kind::assign;
  Place lhs;       // assign
  Rvalue rvalue;   // assign
  LocalId dead = 0;  // storage_dead
};

struct Terminator {
  enum class Kind { call, ret, goto_ };
  Kind kind = Kind::ret;
  // call
  std::string callee;
  std::vector<Operand> args;
  LocalId dest = 0;
  bool is_unsafe_api = false;
  // goto
  BlockId target = 0;
};

struct BasicBlock {
  std::vector<Statement> statements;
  Terminator terminator;
};

// ---------------------------------------------------------------------------
// Definitions
// ---------------------------------------------------------------------------

enum class Visibility { public_, private_ };

struct GenericParam {
  std::string name;
  std::vector<std::string> bounds;  // trait or lifetime bound names
};

struct LocalDecl {
  LocalId id = 0;
  TypeDescriptor type;
};

struct AggregateField {
  std::string name;
  TypeDescriptor type;
  Visibility visibility = Visibility::private_;
};

enum class AggregateRepr { default_, c, transparent };

struct AggregateDef {
  std::string name;
  AggregateRepr repr = AggregateRepr::default_;
  Visibility visibility = Visibility::private_;
  std::vector<AggregateField> fields;
};

struct TraitDef {
  std::string name;
  std::vector<std::string> supertraits;
  std::vector<TypeDescriptor> implementors;
};

struct FunctionIR {
  std::string name;
  Visibility visibility = Visibility::private_;
  std::optional<std::string> method_of;  // receiver aggregate for methods
  bool contains_unsafe = false;
  std::vector<GenericParam> generics;
  std::vector<LocalDecl> params;  // ids 1..n, mirrored in locals
  TypeDescriptor return_type;
  std::vector<LocalDecl> locals;  // complete table, includes the return slot
  std::vector<BasicBlock> blocks;

  const TypeDescriptor* local_type(LocalId id) const;
  bool has_local(LocalId id) const;
};

struct PackageIR {
  std::string name;
  std::vector<FunctionIR> functions;
  std::map<std::string, AggregateDef> aggregates;
  std::map<std::string, TraitDef> traits;

  const FunctionIR* function(std::string_view fn_name) const;
};

// ---------------------------------------------------------------------------
// Parsing, validation, serialization
// ---------------------------------------------------------------------------

class ParseError : public std::runtime_error {
 public:
  enum class Kind { malformed_document, dangling_reference };

  ParseError(Kind kind, std::string path, const std::string& message);
  Kind kind() const { return kind_; }
  // JSON-pointer-ish location of the offending node, e.g. "/functions/0/blocks/1".
  const std::string& path() const { return path_; }

 private:
  Kind kind_;
  std::string path_;
};

struct Violation {
  std::string function;  // empty for package-level problems
  int block = -1;
  int index = -1;  // statement index; statements.size() denotes the terminator
  std::string message;
  bool dangling = false;  // id/reference out of range (vs. structural rule)

  std::string to_string() const;
};

// Strict parse: structural schema first, then validate(); throws ParseError.
PackageIR parse_package(const std::string& document);
// Structural parse only; the result may violate semantic invariants.
// Exists so adversarial documents can be fed to validate() in tests.
PackageIR parse_package_unvalidated(const std::string& document);
// Total over arbitrary in-memory packages; never throws.
std::vector<Violation> validate(const PackageIR& pkg);
// Deterministic rendering back to the document schema. serialize(parse(d))
// reparses to a structurally identical package.
std::string serialize_package(const PackageIR& pkg);

// Definition lookup by aggregate name; nullptr when absent.
const AggregateDef* resolve_aggregate(std::string_view name, const PackageIR& pkg);

// Closed primitive-name set shared by the schema and the semantics tables.
const std::vector<std::string>& primitive_names();
bool is_primitive_name(std::string_view name);

// Bound names known without any package context (standard marker traits plus
// the built-in layout-guard trait). Used when checking supertrait references.
const std::set<std::string>& builtin_trait_names();

// True when the type occupies no storage: empty aggregates, zero-length
// arrays and compositions thereof. Tolerates cyclic aggregate definitions.
bool is_zero_sized(const TypeDescriptor& ty, const PackageIR& pkg);

}  // namespace typesift
