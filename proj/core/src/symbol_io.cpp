#include "toepspec/symbol_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "toepspec/errors.hpp"

namespace toepspec {

using nlohmann::json;

std::string to_string(SymbolKind kind) {
  return kind == SymbolKind::trig_polynomial ? "trig_polynomial" : "general";
}

namespace {

SymbolKind kind_from_string(const std::string& text) {
  if (text == "trig_polynomial") return SymbolKind::trig_polynomial;
  if (text == "general") return SymbolKind::general;
  throw InvalidArgument("unknown symbol kind '" + text + "'");
}

std::string key_of(const MultiIndex& j) {
  std::string out;
  for (int d = 0; d < j.dims(); ++d) {
    if (d) out += ',';
    out += std::to_string(j[d]);
  }
  return out;
}

}  // namespace

SymbolDocument parse_symbol_document(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    // byte offset only; report it as column of a single logical line
    throw ParseError(e.what(), 1, static_cast<int>(e.byte), "");
  }
  if (!j.is_object()) throw InvalidArgument("symbol document must be a JSON object");
  SymbolDocument doc;
  try {
    doc.k = j.at("k").get<int>();
    doc.s = j.at("s").get<int>();
    if (j.contains("kind")) doc.kind = kind_from_string(j.at("kind").get<std::string>());
    doc.name = j.value("name", std::string{});
    if (j.contains("params"))
      for (const auto& [key, value] : j.at("params").items()) doc.params[key] = value.get<double>();
    const bool has_expr = j.contains("expression");
    const bool has_table = j.contains("coefficients");
    if (has_expr == has_table)
      throw InvalidArgument("symbol document needs exactly one of 'expression' and 'coefficients'");
    if (has_expr) doc.expression = j.at("expression").get<std::string>();
    if (has_table) {
      CoefficientTable table;
      const auto s = static_cast<std::size_t>(doc.s);
      for (const auto& [key, value] : j.at("coefficients").items()) {
        auto idx = MultiIndex::parse(key);
        if (idx.dims() != doc.k) throw InvalidArgument("coefficient key '" + key + "' has wrong length");
        auto reals = value.get<std::vector<double>>();
        if (reals.size() != 2 * s * s)
          throw InvalidArgument("coefficient '" + key + "' needs " + std::to_string(2 * s * s) + " reals");
        ComplexMatrix c(s, s);
        for (std::size_t e = 0; e < s * s; ++e) c.entries()[e] = {reals[2 * e], reals[2 * e + 1]};
        table.emplace(idx, c);
      }
      doc.coefficients = std::move(table);
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed symbol document: ") + e.what());
  }
  return doc;
}

std::string to_json(const SymbolDocument& doc, int indent) {
  json j;
  j["k"] = doc.k;
  j["s"] = doc.s;
  if (doc.kind) j["kind"] = to_string(*doc.kind);
  j["name"] = doc.name;
  if (doc.expression) j["expression"] = *doc.expression;
  if (doc.coefficients) {
    json table = json::object();
    for (const auto& [idx, c] : *doc.coefficients) {
      std::vector<double> reals;
      for (auto z : c.entries()) {
        reals.push_back(z.real());
        reals.push_back(z.imag());
      }
      table[key_of(idx)] = reals;
    }
    j["coefficients"] = table;
  }
  j["params"] = json::object();
  for (const auto& [key, value] : doc.params) j["params"][key] = value;
  return j.dump(indent);
}

MatrixSymbol build_symbol(const SymbolDocument& doc) {
  auto sym = doc.expression
                 ? dsl::compile_text(*doc.expression, doc.k, doc.s, doc.params, doc.name)
                 : MatrixSymbol::trig(doc.k, doc.s, *doc.coefficients, doc.name);
  if (doc.kind && *doc.kind != sym.kind())
    throw InvalidArgument("symbol '" + doc.name + "' declared " + to_string(*doc.kind) +
                          " but builds as " + to_string(sym.kind()));
  return sym;
}

SymbolDocument document_from_symbol(const MatrixSymbol& sym) {
  if (!sym.is_trig()) throw InvalidArgument("general symbols have no coefficient table to export");
  SymbolDocument doc;
  doc.k = sym.dims();
  doc.s = sym.block_size();
  doc.kind = sym.kind();
  doc.name = sym.name();
  doc.coefficients = sym.coefficients();
  return doc;
}

SymbolDocument read_symbol_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open symbol file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_symbol_document(buf.str());
}

MatrixSymbol load_symbol_file(const std::filesystem::path& path) {
  return build_symbol(read_symbol_file(path));
}

}  // namespace toepspec
