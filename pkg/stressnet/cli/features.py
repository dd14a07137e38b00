"""Subcommand extracting HR, HRV and breathing comparison signals."""
import logging
import typing as tp

from plumbum import cli

from stressnet import errors, isti
from stressnet.cli.main import Command, parse_floats, parse_ints
from stressnet.formats import tables, video
from stressnet.settings import CFG
from stressnet.timeseries import detect_peaks

LOG = logging.getLogger(__name__)


def configured_roi() -> tp.Tuple[int, int, int, int]:
    roi = CFG["roi"]
    return (int(roi["x0"]), int(roi["y0"]), int(roi["width"]),
            int(roi["height"]))


class StressNetFeatures(Command):
    """
    Heart rate and RMSSD from an ECG, or a band-passed ROI trace from a clip.

    The ROI trace with the default band is the breathing signal; other
    bands (``--band 0.7,3.0``) give the thermal baseline signals.
    """

    ecg = cli.SwitchAttr('--ecg', str, default=None, help="ECG signal CSV")
    hr_out = cli.SwitchAttr('--hr-out', str, default=None, help="HR CSV (bpm)")
    hrv_out = cli.SwitchAttr(
        '--hrv-out', str, default=None, help="RMSSD CSV (ms)"
    )
    window = cli.SwitchAttr('--window', float, default=None,
                            help="HR/HRV window in seconds")
    clip = cli.SwitchAttr('--clip', str, default=None, help="TVF clip")
    roi = cli.SwitchAttr(
        '--roi', str, default=None, help="ROI rectangle x0,y0,w,h"
    )
    breathing_out = cli.SwitchAttr(
        '--breathing-out', str, default=None, help="ROI trace CSV"
    )
    band = cli.SwitchAttr(
        '--band', str, default=None, help="Pass band low,high in Hz"
    )

    def cardiac_features(self) -> None:
        if not (self.hr_out or self.hrv_out):
            raise errors.ValidationError('--ecg needs --hr-out or --hrv-out')
        ecg = tables.read_signal(self.ecg)
        detector = isti.DetectorConfig.from_config(CFG)
        peaks = detect_peaks(
            ecg, detector.ecg_threshold, detector.min_distance_s
        )
        if len(peaks) == 0:
            raise errors.NoPeaksDetected(f'{self.ecg}: no R-peaks found')
        window = self.window or float(CFG["hr"]["window_s"])
        stride = float(CFG["hr"]["stride_s"])
        span = (ecg.t0_seconds, ecg.t_end)
        LOG.info('%s: %d R-peaks', self.ecg, len(peaks))
        if self.hr_out:
            tables.write_signal(
                self.hr_out, isti.compute_hr(peaks, window, stride, span)
            )
        if self.hrv_out:
            tables.write_signal(
                self.hrv_out,
                isti.compute_hrv_rmssd(peaks, window, stride, span)
            )

    def roi_features(self) -> None:
        if not self.breathing_out:
            raise errors.ValidationError('--clip needs --breathing-out')
        roi = parse_ints(self.roi, 4) if self.roi else configured_roi()
        if self.band:
            low, high = parse_floats(self.band, 2)
        else:
            low = float(CFG["breathing"]["low_hz"])
            high = float(CFG["breathing"]["high_hz"])
        clip = video.read_tvf(self.clip)
        sig = isti.breathing_signal(clip, tp.cast(isti.Rect, roi), low, high)
        tables.write_signal(self.breathing_out, sig)

    def main(self) -> int:
        if self.ecg is None and self.clip is None:
            raise errors.ValidationError('give --ecg and/or --clip')
        if self.ecg is not None:
            self.cardiac_features()
        if self.clip is not None:
            self.roi_features()
        return 0
