// SPDX-License-Identifier: Apache-2.0
#include "bugcause/porter.hpp"

#include <array>
#include <cstring>

namespace bugcause {

namespace {

// Working buffer. b holds the word, k is the index of its last letter,
// j marks the end of the stem once a candidate suffix has been matched.
struct Stemmer {
    std::string b;
    int k = 0;
    int j = 0;

    bool is_cons(int i) const {
        switch (b[static_cast<std::size_t>(i)]) {
            case 'a': case 'e': case 'i': case 'o': case 'u': return false;
            case 'y': return i == 0 ? true : !is_cons(i - 1);
            default: return true;
        }
    }

    // Number of consonant-vowel sequences in the stem b[0..j].
    int measure() const {
        int n = 0;
        int i = 0;
        for (;;) {
            if (i > j) return n;
            if (!is_cons(i)) break;
            ++i;
        }
        ++i;
        for (;;) {
            for (;;) {
                if (i > j) return n;
                if (is_cons(i)) break;
                ++i;
            }
            ++i;
            ++n;
            for (;;) {
                if (i > j) return n;
                if (!is_cons(i)) break;
                ++i;
            }
            ++i;
        }
    }

    bool vowel_in_stem() const {
        for (int i = 0; i <= j; ++i)
            if (!is_cons(i)) return true;
        return false;
    }

    bool double_cons(int i) const {
        if (i < 1) return false;
        if (b[static_cast<std::size_t>(i)] != b[static_cast<std::size_t>(i - 1)]) return false;
        return is_cons(i);
    }

    // cons-vowel-cons ending at i, final consonant not w, x, or y.
    bool cvc(int i) const {
        if (i < 2 || !is_cons(i) || is_cons(i - 1) || !is_cons(i - 2)) return false;
        char c = b[static_cast<std::size_t>(i)];
        return c != 'w' && c != 'x' && c != 'y';
    }

    bool ends(const char* s) {
        int len = static_cast<int>(std::strlen(s));
        if (len > k + 1) return false;
        if (std::memcmp(b.data() + k - len + 1, s, static_cast<std::size_t>(len)) != 0)
            return false;
        j = k - len;
        return true;
    }

    void set_to(const char* s) {
        int len = static_cast<int>(std::strlen(s));
        b.replace(static_cast<std::size_t>(j + 1), std::string::npos, s);
        k = j + len;
    }

    void step1ab() {
        if (b[static_cast<std::size_t>(k)] == 's') {
            if (ends("sses")) k -= 2;
            else if (ends("ies")) set_to("i");
            else if (b[static_cast<std::size_t>(k - 1)] != 's') --k;
        }
        if (ends("eed")) {
            if (measure() > 0) --k;
        } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
            k = j;
            if (ends("at")) set_to("ate");
            else if (ends("bl")) set_to("ble");
            else if (ends("iz")) set_to("ize");
            else if (double_cons(k)) {
                char c = b[static_cast<std::size_t>(k)];
                if (c != 'l' && c != 's' && c != 'z') --k;
            } else if (measure() == 1 && cvc(k)) set_to("e");
        }
    }

    void step1c() {
        if (ends("y") && vowel_in_stem()) b[static_cast<std::size_t>(k)] = 'i';
    }

    // Longest matching suffix decides the rule; the condition m > 0 is then
    // tested on the stem, and if it fails nothing in the step applies.
    struct Rule { const char* suffix; const char* replacement; };

    void apply_table(const Rule* rules, int count) {
        for (int i = 0; i < count; ++i) {
            if (ends(rules[i].suffix)) {
                if (measure() > 0) set_to(rules[i].replacement);
                return;
            }
        }
    }

    void step2() {
        static const Rule rules[] = {
            {"ational", "ate"}, {"tional", "tion"}, {"iveness", "ive"},
            {"fulness", "ful"}, {"ousness", "ous"}, {"ization", "ize"},
            {"biliti", "ble"},  {"ation", "ate"},   {"alism", "al"},
            {"aliti", "al"},    {"iviti", "ive"},   {"ousli", "ous"},
            {"entli", "ent"},   {"izer", "ize"},    {"abli", "able"},
            {"ator", "ate"},    {"alli", "al"},     {"enci", "ence"},
            {"anci", "ance"},   {"eli", "e"},
        };
        apply_table(rules, static_cast<int>(std::size(rules)));
    }

    void step3() {
        static const Rule rules[] = {
            {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
            {"ical", "ic"},  {"ness", ""},  {"ful", ""},
        };
        apply_table(rules, static_cast<int>(std::size(rules)));
    }

    void step4() {
        static const char* suffixes[] = {
            "ement", "ance", "ence", "able", "ible", "ment", "ant", "ent",
            "ion",  "ism",  "ate",  "iti",  "ous",  "ive",  "ize", "al",
            "er",   "ic",   "ou",
        };
        for (const char* s : suffixes) {
            if (ends(s)) {
                if (std::strcmp(s, "ion") == 0) {
                    char c = j >= 0 ? b[static_cast<std::size_t>(j)] : '\0';
                    if (c != 's' && c != 't') return;
                }
                if (measure() > 1) k = j;
                return;
            }
        }
    }

    void step5a() {
        j = k;
        if (b[static_cast<std::size_t>(k)] == 'e') {
            int m = measure();
            if (m > 1 || (m == 1 && !cvc(k - 1))) --k;
        }
    }

    void step5b() {
        j = k;
        if (b[static_cast<std::size_t>(k)] == 'l' && double_cons(k) && measure() > 1) --k;
    }
};

} // namespace

std::string porter_stem(std::string_view word) {
    if (word.size() < 3) return std::string(word);
    Stemmer st;
    st.b = word;
    st.k = static_cast<int>(word.size()) - 1;
    st.step1ab();
    st.step1c();
    st.step2();
    st.step3();
    st.step4();
    st.step5a();
    st.step5b();
    st.b.resize(static_cast<std::size_t>(st.k + 1));
    return st.b;
}

} // namespace bugcause
