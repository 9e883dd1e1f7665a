#pragma once

#include <cctype>
#include <map>
#include <string>
#include <vector>

#include "bpce/graph.hpp"

namespace bpce {
namespace epml_detail {

struct XmlElement {
  std::string name;
  std::map<std::string, std::string> attributes;
  std::vector<XmlElement> children;
  std::string text;
  int line = 0;
};

/// Minimal reader for the element subset the EPML import needs: elements,
/// attributes, text content and comments. Anything beyond that (CDATA,
/// processing instructions after the prologue, doctypes) is rejected.
class XmlReader {
 public:
  explicit XmlReader(const std::string& input) : input_(input) {}

  XmlElement parse() {
    skip_prologue();
    XmlElement root = parse_element();
    skip_ws_and_comments();
    if (pos_ != input_.size())
      fail(ErrorKind::SyntaxError, at() + "trailing content after root element");
    return root;
  }

 private:
  std::string at() const { return "line " + std::to_string(line_) + ": "; }

  char peek() const { return pos_ < input_.size() ? input_[pos_] : '\0'; }

  char take() {
    if (pos_ >= input_.size()) fail(ErrorKind::SyntaxError, at() + "unexpected end of input");
    char c = input_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  bool consume(const std::string& s) {
    if (input_.compare(pos_, s.size(), s) != 0) return false;
    for (std::size_t i = 0; i < s.size(); ++i) take();
    return true;
  }

  void skip_ws() {
    while (pos_ < input_.size() && std::isspace(static_cast<unsigned char>(peek()))) take();
  }

  void skip_ws_and_comments() {
    for (;;) {
      skip_ws();
      if (consume("<!--")) {
        while (!consume("-->")) take();
        continue;
      }
      return;
    }
  }

  void skip_prologue() {
    skip_ws();
    if (consume("<?xml")) {
      while (!consume("?>")) take();
    }
    skip_ws_and_comments();
  }

  std::string parse_name() {
    std::string name;
    while (pos_ < input_.size() &&
           (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
            peek() == '-' || peek() == ':' || peek() == '.'))
      name.push_back(take());
    if (name.empty()) fail(ErrorKind::SyntaxError, at() + "expected a name");
    return name;
  }

  std::string decode_entities(const std::string& raw) {
    std::string out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out.push_back(raw[i]);
        continue;
      }
      auto end = raw.find(';', i);
      if (end == std::string::npos) fail(ErrorKind::SyntaxError, at() + "unterminated entity");
      std::string ent = raw.substr(i + 1, end - i - 1);
      if (ent == "amp") out.push_back('&');
      else if (ent == "lt") out.push_back('<');
      else if (ent == "gt") out.push_back('>');
      else if (ent == "quot") out.push_back('"');
      else if (ent == "apos") out.push_back('\'');
      else fail(ErrorKind::SyntaxError, at() + "unknown entity &" + ent + ";");
      i = end;
    }
    return out;
  }

  XmlElement parse_element() {
    skip_ws_and_comments();
    if (!consume("<")) fail(ErrorKind::SyntaxError, at() + "expected an element");
    XmlElement el;
    el.line = line_;
    el.name = parse_name();
    for (;;) {
      skip_ws();
      if (consume("/>")) return el;
      if (consume(">")) break;
      std::string attr = parse_name();
      skip_ws();
      if (!consume("=")) fail(ErrorKind::SyntaxError, at() + "expected '=' after attribute");
      skip_ws();
      char quote = take();
      if (quote != '"' && quote != '\'')
        fail(ErrorKind::SyntaxError, at() + "attribute value must be quoted");
      std::string value;
      while (peek() != quote) value.push_back(take());
      take();
      el.attributes[attr] = decode_entities(value);
    }
    for (;;) {
      std::string chunk;
      while (peek() != '<') chunk.push_back(take());
      el.text += chunk;
      if (consume("<!--")) {
        while (!consume("-->")) take();
        continue;
      }
      if (input_.compare(pos_, 2, "</") == 0) {
        consume("</");
        std::string closing = parse_name();
        if (closing != el.name)
          fail(ErrorKind::SyntaxError, at() + "mismatched close tag </" + closing + ">");
        skip_ws();
        if (!consume(">")) fail(ErrorKind::SyntaxError, at() + "malformed close tag");
        el.text = decode_entities(el.text);
        return el;
      }
      el.children.push_back(parse_element());
    }
  }

  const std::string& input_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

inline std::string encode_entities(const std::string& raw) {
  std::string out;
  for (char c : raw) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace epml_detail

/// Parses the EPML subset: one epc element holding event, function,
/// and/or/xor connector and arc elements. Labels come from name children;
/// the process id from the epc's name (or epcId) attribute.
inline ProcessGraph parse_model_epml(const std::string& bytes) {
  epml_detail::XmlReader reader(bytes);
  epml_detail::XmlElement root = reader.parse();
  if (root.name != "epml")
    fail(ErrorKind::SchemaError, "line " + std::to_string(root.line) + ": expected <epml> root");
  const epml_detail::XmlElement* epc = nullptr;
  for (const auto& child : root.children)
    if (child.name == "epc") {
      if (epc) fail(ErrorKind::SchemaError, "multiple <epc> elements are not supported");
      epc = &child;
    }
  if (!epc) fail(ErrorKind::SchemaError, "missing <epc> element");

  ProcessGraph g;
  auto attr = [](const epml_detail::XmlElement& el, const char* name) -> std::string {
    auto it = el.attributes.find(name);
    if (it == el.attributes.end())
      fail(ErrorKind::SchemaError, "line " + std::to_string(el.line) + ": <" + el.name +
                                       "> misses attribute '" + name + "'");
    return it->second;
  };
  g.pid = epc->attributes.count("name") ? epc->attributes.at("name") : attr(*epc, "epcId");

  auto name_of = [](const epml_detail::XmlElement& el) -> std::string {
    for (const auto& child : el.children)
      if (child.name == "name") return child.text;
    return "";
  };

  struct PendingArc {
    NodeId source, target;
    int line;
  };
  std::vector<PendingArc> arcs;
  for (const auto& el : epc->children) {
    std::string where = "line " + std::to_string(el.line) + ": ";
    if (el.name == "event" || el.name == "function") {
      Node n;
      n.id = attr(el, "id");
      n.label = name_of(el);
      n.type.kind = el.name == "event" ? NodeKind::Event : NodeKind::Function;
      if (n.label.empty())
        fail(ErrorKind::SchemaError, where + el.name + " '" + n.id + "' needs a <name>");
      if (g.has_node(n.id)) fail(ErrorKind::SchemaError, where + "duplicate id '" + n.id + "'");
      g.add_node(std::move(n));
    } else if (el.name == "and" || el.name == "or" || el.name == "xor") {
      ConnectorKind kind = el.name == "and" ? ConnectorKind::And
                           : el.name == "or" ? ConnectorKind::Or
                                             : ConnectorKind::Xor;
      NodeId id = attr(el, "id");
      if (g.has_node(id)) fail(ErrorKind::SchemaError, where + "duplicate id '" + id + "'");
      g.add_node(make_connector(id, kind, name_of(el)));
    } else if (el.name == "arc") {
      const epml_detail::XmlElement* flow = nullptr;
      for (const auto& child : el.children)
        if (child.name == "flow") flow = &child;
      if (!flow) fail(ErrorKind::SchemaError, where + "<arc> without <flow>");
      arcs.push_back({attr(*flow, "source"), attr(*flow, "target"), flow->line});
    } else {
      fail(ErrorKind::SchemaError, where + "unsupported element <" + el.name + ">");
    }
  }
  for (const auto& arc : arcs) {
    std::string where = "line " + std::to_string(arc.line) + ": ";
    if (!g.has_node(arc.source))
      fail(ErrorKind::SchemaError, where + "dangling arc source '" + arc.source + "'");
    if (!g.has_node(arc.target))
      fail(ErrorKind::SchemaError, where + "dangling arc target '" + arc.target + "'");
    if (arc.source == arc.target) fail(ErrorKind::SchemaError, where + "self loop");
    if (g.has_edge(arc.source, arc.target))
      fail(ErrorKind::SchemaError, where + "duplicate arc");
    g.add_edge(arc.source, arc.target);
  }
  return g;
}

/// Writes a variant in the EPML subset read back by parse_model_epml.
/// Configurable graphs carry annotations the subset cannot express; export
/// them as JSON instead.
inline std::string serialize_model_epml(const ProcessGraph& g) {
  using epml_detail::encode_entities;
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<epml>\n";
  out += "  <epc epcId=\"1\" name=\"" + encode_entities(g.pid) + "\">\n";
  int arc = 1;
  for (const auto& [id, n] : g.nodes) {
    std::string tag;
    switch (n.type.kind) {
      case NodeKind::Event: tag = "event"; break;
      case NodeKind::Function: tag = "function"; break;
      case NodeKind::Connector:
        tag = *n.type.connector_kind == ConnectorKind::And ? "and"
              : *n.type.connector_kind == ConnectorKind::Or ? "or"
                                                            : "xor";
        break;
    }
    out += "    <" + tag + " id=\"" + encode_entities(id) + "\"";
    if (!n.label.empty())
      out += ">\n      <name>" + encode_entities(n.label) + "</name>\n    </" + tag + ">\n";
    else
      out += "/>\n";
  }
  for (const auto& e : g.edges) {
    out += "    <arc id=\"a" + std::to_string(arc++) + "\">\n      <flow source=\"" +
           encode_entities(e.source) + "\" target=\"" + encode_entities(e.target) +
           "\"/>\n    </arc>\n";
  }
  out += "  </epc>\n</epml>\n";
  return out;
}

inline std::string serialize_model_epml(const ConfigurableProcessGraph&) {
  fail(ErrorKind::UnsupportedFeature,
       "the EPML subset cannot express edge annotations; export configurable models as JSON");
}

}  // namespace bpce
