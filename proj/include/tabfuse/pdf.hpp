#pragma once

// Best-effort PDF adapter. The canonical pipeline input is layout JSON;
// this module provides (a) a minimal renderer that writes a PageLayout as a
// plain text-based PDF and (b) an extractor that recovers per-token extents
// from uncompressed text-showing content streams. The renderer exists so
// the extractor can be exercised end to end; fidelity on arbitrary PDFs is
// best effort and encrypted or scanned input is rejected with a hint.
//
// Geometry convention used by the renderer (and assumed on extraction):
// Courier (fixed advance 600/1000), font size = line height in points,
// horizontal scaling chosen per token so the drawn width equals the token
// extent. This makes render -> extract lossless up to decimal formatting.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tabfuse/error.hpp"
#include "tabfuse/layout.hpp"

namespace tabfuse {

namespace pdfdetail {

constexpr double kCourierAdvance = 0.6; // glyph advance as a fraction of size

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

inline std::string escape_string(const std::string& s) {
    std::string out;
    for (unsigned char c : s) {
        if (c == '(' || c == ')' || c == '\\') {
            out += '\\';
            out += static_cast<char>(c);
        } else if (c < 0x20 || c > 0x7e) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\%03o", c);
            out += buf;
        } else {
            out += static_cast<char>(c);
        }
    }
    return out;
}

} // namespace pdfdetail

// Write pages as a small uncompressed PDF (Courier text only).
inline void render_layout_pdf(const std::string& path,
                              const std::vector<PageLayout>& pages) {
    using pdfdetail::fmt;
    for (const PageLayout& page : pages) validate_page(page);

    std::vector<std::string> objects; // 1-based ids follow vector order
    objects.push_back("<< /Type /Catalog /Pages 2 0 R >>");
    objects.push_back(""); // pages node, filled once kids are known
    objects.push_back("<< /Type /Font /Subtype /Type1 /BaseFont /Courier >>");

    std::string kids;
    for (const PageLayout& page : pages) {
        const double w = page.width_pt;
        const double h = page.height_pt;
        std::string content;
        for (const TextLine& line : page.lines) {
            const double size = line.height() * h;
            const double ty = (1.0 - line.y1) * h;
            for (const Token& tok : line.tokens) {
                const double natural =
                    pdfdetail::kCourierAdvance * size * static_cast<double>(tok.text.size());
                const double desired = (tok.x1 - tok.x0) * w;
                const double tz = natural > 0.0 ? desired / natural * 100.0 : 100.0;
                content += "BT\n/F1 " + fmt(size) + " Tf\n" + fmt(tz) + " Tz\n1 0 0 1 " +
                           fmt(tok.x0 * w) + " " + fmt(ty) + " Tm\n(" +
                           pdfdetail::escape_string(tok.text) + ") Tj\nET\n";
            }
        }
        const int content_id = static_cast<int>(objects.size()) + 2;
        const int page_id = static_cast<int>(objects.size()) + 1;
        objects.push_back("<< /Type /Page /Parent 2 0 R /MediaBox [0 0 " + fmt(w) + " " +
                          fmt(h) + "] /Resources << /Font << /F1 3 0 R >> >> /Contents " +
                          std::to_string(content_id) + " 0 R >>");
        objects.push_back("<< /Length " + std::to_string(content.size()) +
                          " >>\nstream\n" + content + "endstream");
        kids += std::to_string(page_id) + " 0 R ";
    }
    objects[1] = "<< /Type /Pages /Kids [" + kids + "] /Count " +
                 std::to_string(pages.size()) + " >>";

    std::string out = "%PDF-1.4\n";
    std::vector<std::size_t> offsets;
    for (std::size_t i = 0; i < objects.size(); ++i) {
        offsets.push_back(out.size());
        out += std::to_string(i + 1) + " 0 obj\n" + objects[i] + "\nendobj\n";
    }
    const std::size_t xref_pos = out.size();
    out += "xref\n0 " + std::to_string(objects.size() + 1) + "\n";
    out += "0000000000 65535 f \n";
    for (std::size_t off : offsets) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%010zu 00000 n \n", off);
        out += buf;
    }
    out += "trailer\n<< /Size " + std::to_string(objects.size() + 1) +
           " /Root 1 0 R >>\nstartxref\n" + std::to_string(xref_pos) + "\n%%EOF\n";

    std::ofstream file(path, std::ios::binary);
    if (!file) throw io_error("cannot write PDF: " + path);
    file << out;
}

namespace pdfdetail {

struct Run {
    std::string text;
    double x0 = 0, x1 = 0; // normalized
    double y0 = 0, y1 = 0;
};

struct ContentToken {
    enum Kind { number, string, name, op, array_open, array_close } kind;
    std::string text;
    double value = 0.0;
};

inline std::vector<ContentToken> tokenize_content(const std::string& s) {
    std::vector<ContentToken> out;
    std::size_t i = 0;
    const std::size_t n = s.size();
    auto is_delim = [](char c) {
        return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' ||
               c == '[' || c == ']' || c == '/' || c == '<' || c == '>';
    };
    while (i < n) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '(') {
            std::string text;
            int depth = 1;
            ++i;
            while (i < n && depth > 0) {
                char ch = s[i];
                if (ch == '\\' && i + 1 < n) {
                    ++i;
                    const char esc = s[i];
                    switch (esc) {
                        case 'n': text += '\n'; break;
                        case 'r': text += '\r'; break;
                        case 't': text += '\t'; break;
                        case 'b': text += '\b'; break;
                        case 'f': text += '\f'; break;
                        case '(': case ')': case '\\': text += esc; break;
                        default:
                            if (esc >= '0' && esc <= '7') {
                                int v = 0, k = 0;
                                while (k < 3 && i < n && s[i] >= '0' && s[i] <= '7') {
                                    v = v * 8 + (s[i] - '0');
                                    ++i;
                                    ++k;
                                }
                                --i;
                                text += static_cast<char>(v);
                            } else {
                                text += esc;
                            }
                    }
                    ++i;
                } else if (ch == '(') {
                    ++depth;
                    text += ch;
                    ++i;
                } else if (ch == ')') {
                    --depth;
                    if (depth > 0) text += ch;
                    ++i;
                } else {
                    text += ch;
                    ++i;
                }
            }
            out.push_back({ContentToken::string, text, 0.0});
        } else if (c == '[') {
            out.push_back({ContentToken::array_open, "[", 0.0});
            ++i;
        } else if (c == ']') {
            out.push_back({ContentToken::array_close, "]", 0.0});
            ++i;
        } else if (c == '/') {
            std::size_t j = i + 1;
            while (j < n && !is_delim(s[j])) ++j;
            out.push_back({ContentToken::name, s.substr(i + 1, j - i - 1), 0.0});
            i = j;
        } else if (c == '+' || c == '-' || c == '.' ||
                   std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < n && (s[j] == '+' || s[j] == '-' || s[j] == '.' ||
                             std::isdigit(static_cast<unsigned char>(s[j]))))
                ++j;
            const std::string numtext = s.substr(i, j - i);
            out.push_back({ContentToken::number, numtext, std::atof(numtext.c_str())});
            i = j;
        } else {
            std::size_t j = i;
            while (j < n && !is_delim(s[j]) && s[j] != '+' && s[j] != '-') ++j;
            out.push_back({ContentToken::op, s.substr(i, j - i), 0.0});
            i = j;
        }
    }
    return out;
}

// Interprets the text-positioning subset: BT/ET, Tf, Tz, TL, Tm, Td, TD,
// T*, Tj, TJ, '. Only translation components of Tm are honoured.
inline std::vector<Run> interpret_content(const std::string& content, double w,
                                          double h) {
    std::vector<Run> runs;
    double size = 0.0, tz = 100.0, leading = 0.0;
    double ex = 0.0, ey = 0.0; // text position
    double lx = 0.0, ly = 0.0; // line start position
    bool in_array = false;

    std::vector<double> stack;
    std::vector<std::string> strings;

    auto show = [&](const std::string& text) {
        const double width = kCourierAdvance * size *
                             static_cast<double>(text.size()) * (tz / 100.0);
        Run run;
        run.text = text;
        run.x0 = ex / w;
        run.x1 = (ex + width) / w;
        run.y1 = 1.0 - ey / h;
        run.y0 = run.y1 - size / h;
        if (!text.empty()) runs.push_back(run);
        ex += width;
    };

    for (const ContentToken& tok : tokenize_content(content)) {
        switch (tok.kind) {
            case ContentToken::number:
                if (in_array) {
                    // TJ kern amounts: thousandths of a unit of text space
                    stack.push_back(tok.value);
                    strings.push_back("");
                } else {
                    stack.push_back(tok.value);
                }
                break;
            case ContentToken::string:
                if (in_array) {
                    stack.push_back(std::numeric_limits<double>::quiet_NaN());
                    strings.push_back(tok.text);
                } else {
                    strings.push_back(tok.text);
                }
                break;
            case ContentToken::name:
                break; // font resource names are ignored; metrics are fixed
            case ContentToken::array_open:
                in_array = true;
                stack.clear();
                strings.clear();
                break;
            case ContentToken::array_close:
                in_array = false;
                break;
            case ContentToken::op: {
                const std::string& op = tok.text;
                if (op == "Tf") {
                    if (!stack.empty()) size = stack.back();
                } else if (op == "Tz") {
                    if (!stack.empty()) tz = stack.back();
                } else if (op == "TL") {
                    if (!stack.empty()) leading = stack.back();
                } else if (op == "Tm") {
                    if (stack.size() >= 6) {
                        ex = lx = stack[stack.size() - 2];
                        ey = ly = stack[stack.size() - 1];
                    }
                } else if (op == "Td" || op == "TD") {
                    if (stack.size() >= 2) {
                        lx += stack[stack.size() - 2];
                        ly += stack[stack.size() - 1];
                        ex = lx;
                        ey = ly;
                        if (op == "TD") leading = -stack[stack.size() - 1];
                    }
                } else if (op == "T*") {
                    ly -= leading;
                    ex = lx;
                    ey = ly;
                } else if (op == "Tj") {
                    if (!strings.empty()) show(strings.back());
                } else if (op == "'") {
                    ly -= leading;
                    ex = lx;
                    ey = ly;
                    if (!strings.empty()) show(strings.back());
                } else if (op == "TJ") {
                    for (std::size_t k = 0; k < stack.size(); ++k) {
                        if (std::isnan(stack[k])) {
                            show(strings[k]);
                        } else {
                            ex -= stack[k] / 1000.0 * size * (tz / 100.0);
                        }
                    }
                }
                if (op == "BT" || op == "ET") {
                    ex = ey = lx = ly = 0.0;
                }
                stack.clear();
                strings.clear();
                break;
            }
        }
    }
    return runs;
}

struct PdfObject {
    std::string body;
};

inline std::map<int, PdfObject> scan_objects(const std::string& bytes) {
    std::map<int, PdfObject> objects;
    std::size_t pos = 0;
    while (true) {
        const std::size_t obj_pos = bytes.find(" obj", pos);
        if (obj_pos == std::string::npos) break;
        // backtrack over "<id> <gen>"
        std::size_t start = obj_pos;
        while (start > 0 && (std::isdigit(static_cast<unsigned char>(bytes[start - 1])) ||
                             bytes[start - 1] == ' '))
            --start;
        int id = -1;
        {
            std::istringstream head(bytes.substr(start, obj_pos - start));
            int gen = 0;
            head >> id >> gen;
        }
        const std::size_t body_start = obj_pos + 4;
        const std::size_t end_pos = bytes.find("endobj", body_start);
        if (end_pos == std::string::npos) break;
        if (id >= 0)
            objects[id] = {bytes.substr(body_start, end_pos - body_start)};
        pos = end_pos + 6;
    }
    return objects;
}

inline int parse_ref(const std::string& body, const std::string& key) {
    const std::size_t p = body.find(key);
    if (p == std::string::npos) return -1;
    std::istringstream in(body.substr(p + key.size()));
    int id = -1;
    in >> id;
    return id;
}

inline std::vector<double> parse_number_array(const std::string& body,
                                              const std::string& key) {
    std::vector<double> out;
    const std::size_t p = body.find(key);
    if (p == std::string::npos) return out;
    const std::size_t open = body.find('[', p);
    const std::size_t close = body.find(']', open);
    if (open == std::string::npos || close == std::string::npos) return out;
    std::istringstream in(body.substr(open + 1, close - open - 1));
    double v;
    while (in >> v) out.push_back(v);
    return out;
}

inline std::string stream_payload(const std::string& body) {
    std::size_t p = body.find("stream");
    if (p == std::string::npos) return {};
    p += 6;
    if (p < body.size() && body[p] == '\r') ++p;
    if (p < body.size() && body[p] == '\n') ++p;
    const std::size_t end = body.find("endstream", p);
    if (end == std::string::npos) return {};
    return body.substr(p, end - p);
}

} // namespace pdfdetail

// Extract page layouts from a text-based PDF. Throws unsupported_input for
// encrypted files, compressed content streams, and image-only (scanned)
// pages; a page with no content at all yields an empty layout.
inline std::vector<PageLayout> pdf_to_layout(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw io_error("cannot open PDF: " + path);
    std::stringstream buffer;
    buffer << file.rdbuf();
    const std::string bytes = buffer.str();

    if (bytes.rfind("%PDF-", 0) != 0)
        throw parse_error("not a PDF file: " + path);
    if (bytes.find("/Encrypt") != std::string::npos)
        throw unsupported_input("encrypted PDF: " + path +
                                " (use an external extractor to produce layout JSON)");

    auto objects = pdfdetail::scan_objects(bytes);

    // locate the page tree
    int pages_id = -1;
    for (const auto& [id, obj] : objects)
        if (obj.body.find("/Type /Catalog") != std::string::npos ||
            obj.body.find("/Type/Catalog") != std::string::npos)
            pages_id = pdfdetail::parse_ref(obj.body, "/Pages");
    std::vector<int> page_ids;
    if (pages_id >= 0 && objects.count(pages_id)) {
        const std::string& body = objects[pages_id].body;
        const std::size_t open = body.find("/Kids");
        if (open != std::string::npos) {
            const std::size_t lb = body.find('[', open);
            const std::size_t rb = body.find(']', lb);
            std::istringstream in(body.substr(lb + 1, rb - lb - 1));
            int id, gen;
            std::string r;
            while (in >> id >> gen >> r) page_ids.push_back(id);
        }
    }
    if (page_ids.empty()) {
        for (const auto& [id, obj] : objects)
            if (obj.body.find("/Type /Page") != std::string::npos &&
                obj.body.find("/Type /Pages") == std::string::npos)
                page_ids.push_back(id);
    }
    if (page_ids.empty())
        throw parse_error("no pages found in PDF: " + path);

    std::vector<PageLayout> layouts;
    for (std::size_t pi = 0; pi < page_ids.size(); ++pi) {
        if (!objects.count(page_ids[pi]))
            throw parse_error("dangling page reference in PDF: " + path);
        const std::string& page_body = objects[page_ids[pi]].body;
        std::vector<double> media = pdfdetail::parse_number_array(page_body, "/MediaBox");
        if (media.size() != 4 && pages_id >= 0 && objects.count(pages_id))
            media = pdfdetail::parse_number_array(objects[pages_id].body, "/MediaBox");
        if (media.size() != 4)
            throw parse_error("page without MediaBox in PDF: " + path);
        const double w = media[2] - media[0];
        const double h = media[3] - media[1];

        std::string content;
        const int content_id = pdfdetail::parse_ref(page_body, "/Contents");
        if (content_id >= 0 && objects.count(content_id)) {
            const std::string& stream_body = objects[content_id].body;
            if (stream_body.find("/Filter") != std::string::npos)
                throw unsupported_input("compressed content stream in PDF: " + path);
            content = pdfdetail::stream_payload(stream_body);
        }

        auto runs = pdfdetail::interpret_content(content, w, h);
        if (runs.empty()) {
            const bool has_image = page_body.find("/XObject") != std::string::npos ||
                                   content.find("/Image") != std::string::npos ||
                                   content.find(" Do") != std::string::npos;
            if (has_image)
                throw unsupported_input(
                    "image-only (scanned) PDF page: " + path +
                    " (use an external extractor to produce layout JSON)");
        }

        PageLayout page;
        page.page_id = "p" + std::to_string(pi + 1);
        page.width_pt = w;
        page.height_pt = h;

        std::stable_sort(runs.begin(), runs.end(),
                         [](const pdfdetail::Run& a, const pdfdetail::Run& b) {
                             return a.y0 < b.y0;
                         });
        // group runs into lines: a run joins the open line when the vertical
        // overlap is at least half of the shorter height
        std::vector<std::vector<pdfdetail::Run>> groups;
        for (const pdfdetail::Run& run : runs) {
            bool placed = false;
            if (!groups.empty()) {
                double gy0 = 1.0, gy1 = 0.0;
                for (const auto& r : groups.back()) {
                    gy0 = std::min(gy0, r.y0);
                    gy1 = std::max(gy1, r.y1);
                }
                const double overlap = std::min(gy1, run.y1) - std::max(gy0, run.y0);
                const double shorter = std::min(gy1 - gy0, run.y1 - run.y0);
                if (overlap >= 0.5 * shorter) {
                    groups.back().push_back(run);
                    placed = true;
                }
            }
            if (!placed) groups.push_back({run});
        }
        for (auto& group : groups) {
            std::stable_sort(group.begin(), group.end(),
                             [](const pdfdetail::Run& a, const pdfdetail::Run& b) {
                                 return a.x0 < b.x0;
                             });
            TextLine line;
            line.y0 = 1.0;
            line.y1 = 0.0;
            for (const auto& run : group) {
                line.y0 = std::min(line.y0, run.y0);
                line.y1 = std::max(line.y1, run.y1);
                Token tok{run.text, std::clamp(run.x0, 0.0, 1.0), std::clamp(run.x1, 0.0, 1.0)};
                if (!line.tokens.empty() && tok.x0 < line.tokens.back().x1) {
                    // overlapping extraction artefact: merge into the previous token
                    line.tokens.back().text += tok.text;
                    line.tokens.back().x1 = std::max(line.tokens.back().x1, tok.x1);
                } else {
                    line.tokens.push_back(tok);
                }
            }
            line.y0 = std::clamp(line.y0, 0.0, 1.0);
            line.y1 = std::clamp(line.y1, 0.0, 1.0);
            page.lines.push_back(std::move(line));
        }
        validate_page(page);
        layouts.push_back(std::move(page));
    }
    return layouts;
}

} // namespace tabfuse
