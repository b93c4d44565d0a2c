"""
Aggregation of stability-curve CSV files into an SVG plot and an HTML summary.
"""

from datetime import datetime
from pathlib import Path
from typing import Dict, List, Sequence
import logging

from src.recovery.curve import fit_lambda, read_curve_csv
from src.reports.plot import curve_svg


class ReportBuilder:
    """Build the stability report from one or more curve CSV files."""

    def __init__(self, config: dict = None):
        self.config = config or {}
        self.logger = logging.getLogger(self.__class__.__name__)
        output = self.config.get('output', {}) or {}
        self.title = output.get('report_title', 'CGO Maxwell stability report')

    def _create_point_row_html(self, source: str, row: Dict[str, float]) -> str:
        """Create one table row for a curve point."""
        return f'''
            <tr>
                <td style="padding: 4px 12px; color: #666;">{source}</td>
                <td style="padding: 4px 12px; text-align: right;">{row['delta_c']:.3e}</td>
                <td style="padding: 4px 12px; text-align: right;">{row['tau']:.2f}</td>
                <td style="padding: 4px 12px; text-align: right;">{row['h1_error']:.3e}</td>
            </tr>
        '''

    def _create_report_html(self, rows: List[Dict[str, float]], sources: List[str],
                            fit: Dict[str, float], svg_name: str) -> str:
        """Create the full HTML summary."""
        html = f'''
        <!DOCTYPE html>
        <html>
        <head>
            <meta charset="UTF-8">
            <title>{self.title}</title>
        </head>
        <body style="font-family: -apple-system, BlinkMacSystemFont, 'Segoe UI', Roboto, sans-serif;
                     max-width: 720px; margin: 0 auto; padding: 20px; background: #f5f5f5;">
            <div style="background: white; border-radius: 12px; padding: 24px; box-shadow: 0 2px 8px rgba(0,0,0,0.1);">
                <h1 style="color: #1a1a1a; margin-bottom: 8px;">{self.title}</h1>
                <p style="color: #666; margin-bottom: 24px;">
                    {len(rows)} curve points from {len(set(sources))} file(s) • {datetime.now().strftime('%b %d, %Y')}
                </p>
                <p style="margin: 4px 0;">
                    Fitted exponent <strong>lambda = {fit['lambda']:.4f}</strong>
                    over {fit['points']} points (error ≈ C |log delta_C|^-lambda)
                </p>
                <img src="{svg_name}" alt="stability curve" style="width: 100%; margin: 16px 0;"/>
                <table style="border-collapse: collapse; width: 100%; font-size: 13px;">
                    <tr style="border-bottom: 2px solid #1976D2;">
                        <th style="padding: 4px 12px; text-align: left;">source</th>
                        <th style="padding: 4px 12px; text-align: right;">delta_C</th>
                        <th style="padding: 4px 12px; text-align: right;">tau</th>
                        <th style="padding: 4px 12px; text-align: right;">H1 error</th>
                    </tr>
        '''
        for source, row in zip(sources, rows):
            html += self._create_point_row_html(source, row)

        html += '''
                </table>
            </div>
        </body>
        </html>
        '''
        return html

    def build(self, csv_paths: Sequence, out_dir) -> List[Path]:
        """Write curve.svg and report.html; returns the written paths."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        rows, sources = [], []
        for path in csv_paths:
            for row in read_curve_csv(path):
                rows.append(row)
                sources.append(Path(path).name)
        self.logger.info(f"Report over {len(rows)} points from {len(csv_paths)} file(s)")

        fit = fit_lambda([r['delta_c'] for r in rows], [r['h1_error'] for r in rows])
        svg_path = out_dir / "curve.svg"
        svg_path.write_text(curve_svg(rows, fit, self.title), encoding='utf-8')
        html_path = out_dir / "report.html"
        html_path.write_text(self._create_report_html(rows, sources, fit, svg_path.name),
                             encoding='utf-8')
        return [svg_path, html_path]
