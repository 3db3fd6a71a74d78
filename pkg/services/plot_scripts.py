"""Companion gnuplot scripts for the tidy CSV data files."""

from typing import Dict

from services.errors import InvalidInputError

_HEADER = """set datafile separator ','
set key autotitle columnhead
set terminal pngcairo size 900,600
set output '{stem}.png'
"""

TEMPLATES: Dict[str, str] = {
    "surface": """set xlabel 'true capability'
set ylabel 'sample size n'
set zlabel 'misclassification'
set pm3d map
splot '{data}' using 'cpk_true':'n':'misclass' with pm3d notitle
""",
    "collapse": """set xlabel 'z'
set ylabel 'acceptance probability'
plot '{data}' using 'z':'p_mc' with points title 'Monte Carlo', \\
     '{data}' using 'z':'phi_z' with lines title 'Phi(z)'
""",
    "sampling": """set xlabel 'capability estimate'
set ylabel 'relative frequency'
set style data steps
plot for [n in '{n_values}'] '{data}' using 'bin_lo':(column('n') == n+0 ? column('mass') : 1/0) title 'n='.n
""",
    "rules": """set xlabel 'true capability'
set ylabel 'acceptance probability'
plot '{data}' using 'cpk_true':'acceptance' with linespoints title '{rule}'
""",
    "bootstrap": """set xlabel '|cpk_hat - c0|'
set ylabel 'flip rate'
plot '{data}' using 'distance_mid':'mean_flip':'q25_flip':'q75_flip' with yerrorlines title 'bin mean'
""",
}


def render(command: str, stem: str, data: str, **fields: str) -> str:
    """Script for ``command`` plotting the CSV file ``data`` into ``stem``.png."""
    if command not in TEMPLATES:
        raise InvalidInputError(f"no plotting script available for {command!r}")
    return _HEADER.format(stem=stem) + TEMPLATES[command].format(data=data, **fields)
