# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
import time
import datetime
import sys

import bduf.settings as settings

__all__ = ['BaseProgressBar', 'TextProgressBar', 'make_progress_bar']


class BaseProgressBar(object):
    """
    A silent progress bar with the shared bookkeeping.

    Example usage:

        pbar = TextProgressBar(steps, label="pretrain")
        for step in range(steps):
            loss = train_step(step)
            pbar.update(step + 1, loss=loss)
        pbar.finished()

    """

    def __init__(self, iterations=0, chunk_size=10, label=""):
        self.start(iterations, chunk_size, label)

    def start(self, iterations, chunk_size=10, label=""):
        self.N = float(max(iterations, 1))
        self.p_chunk_size = chunk_size
        self.p_chunk = chunk_size
        self.label = label
        self.t_start = time.time()

    def update(self, n, loss=None):
        pass

    def time_elapsed(self):
        return "%6.2fs" % (time.time() - self.t_start)

    def time_remaining_est(self, p):
        if p > 0.0:
            t_r_est = (time.time() - self.t_start) * (100.0 - p) / p
        else:
            t_r_est = 0

        dd = datetime.datetime(1, 1, 1) + datetime.timedelta(seconds=t_r_est)
        return "%02d:%02d:%02d:%02d" % (dd.day - 1, dd.hour, dd.minute,
                                        dd.second)

    def finished(self):
        pass


class TextProgressBar(BaseProgressBar):
    """
    Prints a line every `chunk_size` percent with the elapsed time, the
    estimated remaining time and the latest loss.
    """

    def update(self, n, loss=None):
        p = (n / self.N) * 100.0
        if p >= self.p_chunk:
            s = "%s%4.1f%%." % (self.label + ": " if self.label else "", p)
            s += " Run time: %s." % self.time_elapsed()
            s += " Est. time left: %s" % self.time_remaining_est(p)
            if loss is not None:
                s += ". Loss: %.5f" % loss
            print(s)
            sys.stdout.flush()
            while self.p_chunk <= p:
                self.p_chunk += self.p_chunk_size

    def finished(self):
        self.t_done = time.time()
        print("%sTotal run time: %s" % (self.label + ": " if self.label
                                        else "", self.time_elapsed()))


def make_progress_bar(progress_bar, iterations, label=""):
    """
    Resolves a progress bar argument: True gives a TextProgressBar, None
    follows `settings.show_progress`, False a silent bar; instances are
    restarted.
    """
    if progress_bar is None:
        progress_bar = settings.show_progress
    if progress_bar is True:
        return TextProgressBar(iterations, label=label)
    if not progress_bar:
        return BaseProgressBar(iterations, label=label)
    progress_bar.start(iterations, label=label)
    return progress_bar
