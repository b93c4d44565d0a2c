# reports package
from .plot import curve_svg
from .summary import ReportBuilder
