"""Writes the synthetic HTML corpus under tests/fixtures/corpus and its
ground-truth manifest.json. Deterministic; run from anywhere:

    python3 tests/fixtures/generate_corpus.py
"""

import html
import json
import os
import random
import re
import shutil

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "corpus")

DARK = [
    ("Scarcity", "Hurry! Only 2 left in stock"),
    ("Scarcity", "Only 3 left in stock - order soon."),
    ("Scarcity", "Selling fast! Almost gone."),
    ("Scarcity", "Low stock: only a few pieces remaining"),
    ("Scarcity", "Limited quantities available while supplies last"),
    ("Urgency", "Flash sale ends in 02:14:33"),
    ("Urgency", "Offer expires at midnight, act now!"),
    ("Urgency", "Last chance to get 40% off - today only"),
    ("Urgency", "Deal ends tonight. Don't wait!"),
    ("Urgency", "Order within 3 hours for next-day delivery"),
    ("Social Proof", "23 people are viewing this item right now"),
    ("Social Proof", "148 people bought this in the last 24 hours"),
    ("Social Proof", "Jane from Austin just purchased this jacket"),
    ("Social Proof", "Best seller in Running Shoes"),
    ("Social Proof", "5 other shoppers have this in their cart"),
    ("Misdirection", "sdjbfksbdfgbkldsglkdflgf subscribe now or regret the offer of 20% "
                     "djkbfksjbglsbdfsdbfksdbfgkjsbdkgbskdbfsdbfsd"),
    ("Misdirection", "My name is Jin Kazama and I am in Pune, get 30% off on this bottle but you'll have "
                     "to sign up first or you'll miss it, let's go have camping together"),
    ("Misdirection", "No thanks, I don't like saving money"),
    ("Misdirection", "No, I prefer paying full price"),
    ("Misdirection", "Join now or you'll miss out on member prices"),
    ("Sneaking", "A protection plan has been added to your cart"),
    ("Sneaking", "Shipping insurance was automatically added to your order"),
    ("Sneaking", "A $4.99 service fee will be charged at checkout"),
    ("Sneaking", "Your membership renews automatically at $14.99/month"),
    ("Sneaking", "A round-up donation has been pre-selected for you"),
    ("Obstruction", "To cancel, please call our support line during business hours"),
    ("Obstruction", "Subscriptions cannot be cancelled online"),
    ("Obstruction", "To unsubscribe, mail a letter to our head office"),
    ("Obstruction", "A cancellation fee applies to all plans"),
    ("Obstruction", "Contact customer service to close your account"),
    ("Forced Action", "You must create an account to view prices"),
    ("Forced Action", "Sign up to continue reading"),
    ("Forced Action", "Download the app to unlock this coupon"),
    ("Forced Action", "Enter your email to see the discount"),
    ("Forced Action", "You must agree to marketing emails to check out"),
]

BENIGN = [
    "me and my friends are going to buy shoes which are 20% off",
    "Free shipping on orders over $50",
    "Our store is open Monday to Saturday",
    "Made from 100% organic cotton",
    "Machine wash cold and tumble dry low",
    "Read our privacy policy",
    "Customer reviews",
    "Size guide and fit information",
    "Returns are accepted within 30 days of delivery",
    "This lightweight jacket keeps you dry on rainy days",
    "Questions? Our team replies within one business day",
    "Available in blue, green and charcoal",
    "Price includes VAT",
    "Gift cards can be used online and in stores",
    "Product details",
]

# Dark text placed where it must never become a segment.
EXCLUDED_TEMPLATES = [
    '<script>var banner = "{t}";</script>',
    "<style>.promo::after {{ content: '{t}'; }}</style>",
    "<noscript>{t}</noscript>",
    "<template><p>{t}</p></template>",
    "<div hidden><p>{t}</p></div>",
    '<div aria-hidden="true">{t}</div>',
    '<div style="display: none">{t}</div>',
    '<p style="color:red; visibility:hidden">{t}</p>',
    '<input type="hidden" name="promo" value="{t}">',
]

SITES = [("shop-alpha", 1), ("shop-beta", 2), ("shop-gamma", 3)]  # dark injections per page


def norm(s):
    return re.sub(r"\s+", " ", s.replace(" ", " ")).strip()


def inline_markup(text, rng):
    """Renders text with inline elements, entities or odd whitespace; the
    visible text is unchanged."""
    esc = html.escape(text, quote=False)
    words = esc.split(" ")
    style = rng.randrange(5)
    if style == 1 and len(words) > 2:
        k = rng.randrange(1, len(words) - 1)
        return " ".join(words[:k]) + " <b>" + words[k] + "</b> " + " ".join(words[k + 1:])
    if style == 2 and len(words) > 3:
        return "<span>" + " ".join(words[:2]) + "</span>\n   " + " ".join(words[2:])
    if style == 3:
        return esc.replace("'", "&#39;").replace(" ", "&nbsp;", 1)
    if style == 4 and len(words) > 1:
        return '<a href="#">' + words[0] + "</a> " + " ".join(words[1:])
    return esc


def block(text, rng):
    tag = rng.choice(["p", "div", "li", "h3", "td"])
    inner = inline_markup(text, rng)
    if tag == "li":
        return f"<ul><li>{inner}</li></ul>"
    if tag == "td":
        return f"<table><tr><td>{inner}</td></tr></table>"
    return f"<{tag}>{inner}</{tag}>"


def main():
    rng = random.Random(20240611)
    if os.path.isdir(OUT):
        shutil.rmtree(OUT)
    dark_cycle = list(range(len(DARK)))
    rng.shuffle(dark_cycle)
    cursor = 0
    manifest = {"pages": []}
    for site, per_page in SITES:
        os.makedirs(os.path.join(OUT, site))
        for p in range(1, 11):
            page = f"page{p:02d}.html"
            segments = [f"{site.replace('-', ' ').title()} home", "Products Sale Contact"]
            body = [f"<header><h1>{segments[0]}</h1>"
                    '<nav><a href="/">Products</a> <a href="/sale">Sale</a> <a href="/c">Contact</a></nav></header>']
            injected = []
            benign = rng.sample(BENIGN, 4)
            if p in (1, 4, 7):
                benign[0] = BENIGN[0]
            for k in range(per_page):
                cat, text = DARK[dark_cycle[cursor % len(DARK)]]
                cursor += 1
                injected.append({"text": text, "category": cat})
            body_items = [(b, False) for b in benign] + [(d["text"], True) for d in injected]
            rng.shuffle(body_items)
            excluded = []
            main_html = ["<main>"]
            for text, _ in body_items:
                main_html.append(block(text, rng))
                segments.append(norm(text))
                if rng.random() < 0.5:
                    decoy_cat, decoy = DARK[rng.randrange(len(DARK))]
                    marker = f"{decoy} [excluded {site} {p} {len(excluded)}]"
                    tmpl = EXCLUDED_TEMPLATES[(len(excluded) + p) % len(EXCLUDED_TEMPLATES)]
                    main_html.append(tmpl.format(t=html.escape(marker, quote=True)))
                    excluded.append(marker)
            main_html.append("</main>")
            body.extend(main_html)
            body.append("<footer><p>&copy; 2024 All rights reserved</p><p>42</p></footer>")
            segments.append("© 2024 All rights reserved")
            head_marker = f"Flash sale ends soon [excluded {site} {p} head]"
            excluded.append(head_marker)
            doc = ("<!DOCTYPE html>\n<html lang=\"en\"><head><meta charset=\"utf-8\">"
                   f"<title>{html.escape(head_marker)}</title>"
                   "<script src=\"/app.js\"></script></head>\n<body>\n" + "\n".join(body) + "\n</body></html>\n")
            with open(os.path.join(OUT, site, page), "w", encoding="utf-8") as f:
                f.write(doc)
            manifest["pages"].append({
                "site": site,
                "page": page,
                "injected": injected,
                "benign": [norm(b) for b in benign],
                "excluded": excluded,
                "segments": segments,
                "visible_text": " ".join(segments),
            })
    with open(os.path.join(OUT, "manifest.json"), "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=1, ensure_ascii=False)
        f.write("\n")
    n_inj = sum(len(pg["injected"]) for pg in manifest["pages"])
    print(len(manifest["pages"]), "pages,", n_inj, "injected strings")


if __name__ == "__main__":
    main()
