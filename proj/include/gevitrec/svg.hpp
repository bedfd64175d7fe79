#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>

#include "gevitrec/text.hpp"

namespace gevitrec::svg {

using text::fixed;

/// Attribute list: values are emitted verbatim after XML escaping.
using Attrs = std::initializer_list<std::pair<std::string_view, std::string>>;

/// Minimal streaming SVG builder. Coordinates are written with two decimals so
/// output is byte-stable across platforms and locales.
class Writer {
 public:
  std::string& str() { return out_; }
  const std::string& str() const { return out_; }

  void open_document(double width, double height) {
    out_ += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fixed(width) +
            "\" height=\"" + fixed(height) + "\" viewBox=\"0 0 " + fixed(width) + " " + fixed(height) +
            "\" font-family=\"Helvetica, Arial, sans-serif\">\n";
  }
  void close_document() { out_ += "</svg>\n"; }

  void open_group(Attrs attrs = {}) { element_open("g", attrs); }
  void open_group_at(double x, double y, Attrs attrs = {}) {
    out_ += "<g transform=\"translate(" + fixed(x) + "," + fixed(y) + ")\"";
    append_attrs(attrs);
    out_ += ">\n";
  }
  void close_group() { out_ += "</g>\n"; }

  void rect(double x, double y, double w, double h, Attrs attrs = {}) {
    out_ += "<rect x=\"" + fixed(x) + "\" y=\"" + fixed(y) + "\" width=\"" + fixed(w) + "\" height=\"" +
            fixed(h) + "\"";
    append_attrs(attrs);
    out_ += "/>\n";
  }

  void circle(double cx, double cy, double r, Attrs attrs = {}) {
    out_ += "<circle cx=\"" + fixed(cx) + "\" cy=\"" + fixed(cy) + "\" r=\"" + fixed(r) + "\"";
    append_attrs(attrs);
    out_ += "/>\n";
  }

  void line(double x1, double y1, double x2, double y2, Attrs attrs = {}) {
    out_ += "<line x1=\"" + fixed(x1) + "\" y1=\"" + fixed(y1) + "\" x2=\"" + fixed(x2) + "\" y2=\"" +
            fixed(y2) + "\"";
    append_attrs(attrs);
    out_ += "/>\n";
  }

  void path(std::string_view d, Attrs attrs = {}) {
    out_ += "<path d=\"";
    out_ += d;
    out_ += "\"";
    append_attrs(attrs);
    out_ += "/>\n";
  }

  void text(double x, double y, std::string_view content, Attrs attrs = {}) {
    out_ += "<text x=\"" + fixed(x) + "\" y=\"" + fixed(y) + "\"";
    append_attrs(attrs);
    out_ += ">" + text::xml_escape(content) + "</text>\n";
  }

  void raw(std::string_view s) { out_ += s; }

 private:
  void element_open(std::string_view tag, Attrs attrs) {
    out_ += "<";
    out_ += tag;
    append_attrs(attrs);
    out_ += ">\n";
  }

  void append_attrs(Attrs attrs) {
    for (const auto& [k, v] : attrs) {
      out_ += " ";
      out_ += k;
      out_ += "=\"" + text::xml_escape(v) + "\"";
    }
  }

  std::string out_;
};

}  // namespace gevitrec::svg
