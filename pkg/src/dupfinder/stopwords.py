"""Built-in stopword lists backing the default language detector.

The lists are deliberately small: high-frequency function words that show up
in titles. Overlap between languages (e.g. "de" in Spanish and French) is
fine because detection compares hit ratios, not single hits.
"""

from __future__ import annotations

STOPWORDS: dict[str, frozenset[str]] = {
    "en": frozenset(
        """
        a an and are as at be between by can do does during for from has have
        how in into is it its no not of on or over than that the their these
        this those to towards under was were what when which will with
        """.split()
    ),
    "es": frozenset(
        """
        al como con cuando de del desde donde durante el en entre es esta
        este hacia la las le les lo los mas no o para pero por que se sin
        sobre son su sus un una unas unos y
        """.split()
    ),
    "fr": frozenset(
        """
        au aux avec ce ces cette comme dans de des du entre est et la le les
        mais ne ou par pas pendant plus pour quand que qui sans se ses son
        sont sous sur un une vers
        """.split()
    ),
    "de": frozenset(
        """
        aber als am an auch auf aus bei das dem den der des die durch ein
        eine einer eines fuer für im in ist mit nach nicht oder ohne seit
        sich sind und unter von wenn wie zu zum zur zwischen über während
        """.split()
    ),
}
