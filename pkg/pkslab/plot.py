"""
Copyright (c) 2026 pkslab contributors
ALL RIGHTS RESERVED.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
"""
import logging
import os
import re
import itertools
import matplotlib
matplotlib.use("Agg")
import seaborn as sns
import pandas as pd
import matplotlib.pyplot as plt


LOG = logging.getLogger(os.path.basename(__file__))


def get_by_name(name):
    if name == "Lineplot":
        return Lineplot
    if name == "Pointplot":
        return Pointplot
    raise NotImplementedError("'{}' not implemented".format(name))


class BasePlot(object):
    """
    Base class for plots of report series.
    """

    @classmethod
    def generate(cls, conf):
        """
        Generate list of plotter objects. One for each plotter config.
        """
        conf = dict(conf)
        conf.pop("name", None)
        return [cls(**conf)]

    def __init__(self, **kwargs):
        # apply default params
        p = {"title": None,
             "path": None,
             "series": None,
             "x": None,
             "y": None,
             "hue": None,
             "logx": False,
             "logy": False,
             "fig_width": 8,
             "fig_height": 6,
             "fig_dpi": 150,
             "y_lim_min": None,
             "y_lim_max": None,
             "disabled": False}
        p.update(kwargs)
        self.params = p
        self.marker = itertools.cycle(
            ("s", "o", "^", "v", "X", "P", "D", "*", "H"))
        LOG.debug("Initialized plotter: {}".format(self))

    def __repr__(self):
        return "{}({})".format(self.name, self.params)

    @property
    def name(self):
        return self.__class__.__name__

    @property
    def short_name(self):
        return re.sub('[^A-Z]', '', self.name)

    def _get_plot_name(self, series):
        t = str(self.params.get("title") or series)
        return re.sub(r"[^A-Za-z0-9_.-]+", "_", t).strip("-_. ")

    def _columns(self, s):
        """
        x and y columns: plot params override the series defaults.
        """
        x = self.params.get("x") or s.get("x")
        y = self.params.get("y") or s.get("y")
        if isinstance(y, str):
            y = [y]
        return x, list(y or list())

    def plot(self, report, path=None):
        if self.params.get("disabled"):
            LOG.info("'{}' disabled. Skipping plot.".format(self.name))
            return None
        name = self.params.get("series")
        if name not in report.series:
            LOG.warning("{}: report has no series '{}'. Skipping plot."
                        .format(self.name, name))
            return None
        path = self.params.get("path") or path or "."
        os.makedirs(path, exist_ok=True)
        return self._plot(report.series[name], name, path)

    def _plot(self, s, name, path):
        """
        Plot method to be overwritten.
        """
        LOG.warning("BasePlot.plot() not implemented.")

    def _finish(self, fig, ax, name, path, xlabel, ylabel):
        if self.params.get("logx"):
            ax.set_xscale("log")
        if self.params.get("logy"):
            ax.set_yscale("log")
        fig.suptitle(self.params.get("title") or name)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.set_ylim([self.params.get("y_lim_min"),
                     self.params.get("y_lim_max")])
        out = os.path.join(path, "plot_{}.pdf".format(
            self._get_plot_name(name)))
        fig.savefig(out, bbox_inches="tight")
        LOG.info("Wrote plot: {}".format(out))
        plt.close(fig)
        return out

    def _figure(self):
        return plt.subplots(figsize=(self.params.get("fig_width"),
                                     self.params.get("fig_height")),
                            dpi=self.params.get("fig_dpi"))


class Lineplot(BasePlot):
    """
    One line per y column against x.
    """

    def _plot(self, s, name, path):
        sns.set(style="whitegrid")
        sns.set_context("paper", rc={"lines.linewidth": 1.0,
                                     "lines.markersize": 5})
        x, ys = self._columns(s)
        df = s["data"]
        ys = [y for y in ys if y in df.columns]
        if x not in df.columns or not ys:
            LOG.warning("{}: columns {} / {} missing in '{}'".format(
                self.name, x, ys, name))
            return None
        fig, ax = self._figure()
        long = pd.melt(df, id_vars=[x], value_vars=ys, var_name="series",
                       value_name="value")
        sns.lineplot(ax=ax, data=long, x=x, y="value", hue="series",
                     style="series", markers=True, dashes=False)
        ax.legend(loc="best")
        return self._finish(fig, ax, name, path, x,
                            ys[0] if len(ys) == 1 else "value")


class Pointplot(BasePlot):
    """
    Categorical x (e.g. angular mode) with one point series per hue.
    """

    def _plot(self, s, name, path):
        sns.set(style="whitegrid")
        sns.set_context("paper", rc={"lines.linewidth": 0.5,
                                     "lines.markersize": 10})
        x, ys = self._columns(s)
        df = s["data"]
        if x not in df.columns or not ys or ys[0] not in df.columns:
            LOG.warning("{}: columns {} / {} missing in '{}'".format(
                self.name, x, ys, name))
            return None
        fig, ax = self._figure()
        sns.pointplot(ax=ax, data=df, x=x, y=ys[0],
                      hue=self.params.get("hue"), capsize=.3)
        if self.params.get("hue"):
            ax.legend(loc="best")
        return self._finish(fig, ax, name, path, x, ys[0])
