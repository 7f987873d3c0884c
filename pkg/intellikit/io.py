""" Reading and writing audio, corpus manifests, fold plans and feature files

:Author: Intellikit Team
:Date: 2026-10-16
:Copyright: 2026, Intellikit Team
:License: MIT
"""

from .data_model import SAMPLE_RATE, AudioClip, CorpusManifest, FeatureKind, FeatureSequence, FoldPlan, ManifestEntry
from .exceptions import (ConfigurationError, FeatureFileError, ManifestParseError, ManifestValidationError,
                         UnsupportedSampleRateError, WavFormatError)
import csv
import json
import numpy
import os
import scipy.io.wavfile
import struct
import warnings

__all__ = [
    'load_wav',
    'write_wav',
    'parse_manifest',
    'write_manifest',
    'plan_folds',
    'write_fold_plan',
    'read_fold_plan',
    'write_feature_file',
    'read_feature_file',
    'FEATURE_FILE_MAGIC',
    'FEATURE_FILE_VERSION',
]

MANIFEST_COLUMNS = ['path', 'clip_id', 'speaker_id', 'score']
OPTIONAL_MANIFEST_COLUMNS = ['channel']

FEATURE_FILE_MAGIC = b'IKFT'
FEATURE_FILE_VERSION = 1
FEATURE_FILE_HEADER = struct.Struct('<4sHBIII')
FEATURE_KIND_CODES = {FeatureKind.logmel: 0, FeatureKind.modulation: 1}


def load_wav(path, channel=0, clip_id=None, speaker_id=''):
    """ Read a clip from a RIFF/WAVE file

    PCM 16-bit samples are scaled by 1/32768; IEEE float 32-bit samples are used as is.

    Args:
        path (:obj:`str`): path to the file
        channel (:obj:`int`, optional): index of the channel to read
        clip_id (:obj:`str`, optional): id of the clip (default: file name without extension)
        speaker_id (:obj:`str`, optional): id of the speaker

    Returns:
        :obj:`AudioClip`: clip

    Raises:
        :obj:`FileNotFoundError`: if the file doesn't exist
        :obj:`WavFormatError`: if the file is not a PCM16 or float32 WAV file
        :obj:`UnsupportedSampleRateError`: if the file is not sampled at 16 kHz
    """
    if not os.path.isfile(path):
        raise FileNotFoundError('WAV file `{}` does not exist.'.format(path))

    if clip_id is None:
        clip_id = os.path.splitext(os.path.basename(path))[0]

    try:
        with warnings.catch_warnings():
            warnings.simplefilter('error', scipy.io.wavfile.WavFileWarning)
            sample_rate, data = scipy.io.wavfile.read(path)
    except (ValueError, EOFError, struct.error, scipy.io.wavfile.WavFileWarning) as exception:
        raise WavFormatError('`{}` is not a valid WAV file: {}'.format(path, exception))

    if sample_rate != SAMPLE_RATE:
        raise UnsupportedSampleRateError(
            '`{}` is sampled at {} Hz. Only {} Hz is supported; clips are never resampled.'.format(
                path, sample_rate, SAMPLE_RATE))

    if data.dtype == numpy.int16:
        samples = data.astype(numpy.float64) / 32768.
    elif data.dtype == numpy.float32:
        samples = data.astype(numpy.float64)
    else:
        raise WavFormatError(
            '`{}` has samples of type `{}`. Only PCM 16-bit and IEEE float 32-bit are supported.'.format(
                path, data.dtype))

    if samples.ndim == 2:
        if channel < 0 or channel >= samples.shape[1]:
            raise WavFormatError('`{}` has {} channels; channel {} does not exist.'.format(
                path, samples.shape[1], channel))
        samples = samples[:, channel]
    elif channel != 0:
        raise WavFormatError('`{}` is mono; channel {} does not exist.'.format(path, channel))

    return AudioClip(samples, sample_rate, clip_id=clip_id, speaker_id=speaker_id)


def write_wav(path, clip):
    """ Write a clip to a PCM 16-bit WAV file

    Samples are rounded to the nearest multiple of 1/32768 and saturated to [-1, 32767/32768].

    Args:
        path (:obj:`str`): path to the file
        clip (:obj:`AudioClip`): clip
    """
    data = numpy.clip(numpy.round(clip.samples * 32768.), -32768, 32767).astype(numpy.int16)
    scipy.io.wavfile.write(path, clip.sample_rate, data)


def parse_manifest(path):
    """ Read a corpus manifest

    The manifest is a tab-separated file with the header ``path clip_id speaker_id score`` and an optional
    ``channel`` column. Relative paths are resolved against the directory of the manifest.

    Args:
        path (:obj:`str`): path to the manifest

    Returns:
        :obj:`CorpusManifest`: manifest

    Raises:
        :obj:`FileNotFoundError`: if the manifest doesn't exist
        :obj:`ManifestParseError`: if a line has missing or malformed fields
        :obj:`ManifestValidationError`: if a score is outside [0, 100] or a clip id is repeated
    """
    if not os.path.isfile(path):
        raise FileNotFoundError('Corpus manifest not found: `{}`.'.format(path))

    dirname = os.path.dirname(os.path.abspath(path))
    entries = []
    clip_ids = set()
    with open(path, 'r', newline='') as file:
        reader = csv.reader(file, delimiter='\t')
        header = next(reader, None)
        if header is None or header[:len(MANIFEST_COLUMNS)] != MANIFEST_COLUMNS:
            raise ManifestParseError('Header must start with `{}`.'.format('\\t'.join(MANIFEST_COLUMNS)), 1)
        extra_columns = header[len(MANIFEST_COLUMNS):]
        if any(column not in OPTIONAL_MANIFEST_COLUMNS for column in extra_columns):
            raise ManifestParseError('Unknown columns: {}.'.format(', '.join(
                '`{}`'.format(column) for column in extra_columns if column not in OPTIONAL_MANIFEST_COLUMNS)), 1)

        for line_number, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise ManifestParseError('Expected {} fields, found {}.'.format(len(header), len(row)), line_number)
            fields = dict(zip(header, row))
            for column in header:
                if not fields[column].strip():
                    raise ManifestParseError('Field `{}` is empty.'.format(column), line_number)

            try:
                score = int(fields['score'])
            except ValueError:
                raise ManifestParseError('Score `{}` is not an integer.'.format(fields['score']), line_number)
            if score < 0 or score > 100:
                raise ManifestValidationError('Line {}: score {} of clip `{}` must be between 0 and 100.'.format(
                    line_number, score, fields['clip_id']))

            try:
                channel = int(fields.get('channel', '0'))
            except ValueError:
                raise ManifestParseError('Channel `{}` is not an integer.'.format(fields['channel']), line_number)

            if fields['clip_id'] in clip_ids:
                raise ManifestValidationError('Line {}: clip id `{}` is repeated.'.format(
                    line_number, fields['clip_id']))
            clip_ids.add(fields['clip_id'])

            entries.append(ManifestEntry(
                path=os.path.join(dirname, fields['path']),
                clip_id=fields['clip_id'],
                speaker_id=fields['speaker_id'],
                score=score,
                channel=channel,
            ))

    return CorpusManifest(entries)


def write_manifest(path, manifest):
    """ Write a corpus manifest; paths are written relative to the directory of the manifest

    Args:
        path (:obj:`str`): path to the manifest
        manifest (:obj:`CorpusManifest`): manifest
    """
    dirname = os.path.dirname(os.path.abspath(path))
    with_channel = any(entry.channel != 0 for entry in manifest.entries)
    with open(path, 'w', newline='') as file:
        writer = csv.writer(file, delimiter='\t', lineterminator='\n')
        writer.writerow(MANIFEST_COLUMNS + (OPTIONAL_MANIFEST_COLUMNS if with_channel else []))
        for entry in manifest.entries:
            row = [os.path.relpath(entry.path, dirname), entry.clip_id, entry.speaker_id, entry.score]
            if with_channel:
                row.append(entry.channel)
            writer.writerow(row)


def plan_folds(manifest, k=5, seed=0):
    """ Assign the speakers of a corpus to ``k`` folds of balanced size

    Speakers are shuffled with a seeded generator and dealt to the folds in turn, so that fold sizes differ by
    at most one speaker.

    Args:
        manifest (:obj:`CorpusManifest`): manifest
        k (:obj:`int`, optional): number of folds
        seed (:obj:`int`, optional): seed

    Returns:
        :obj:`FoldPlan`: plan

    Raises:
        :obj:`ConfigurationError`: if ``k < 2`` or there are fewer speakers than folds
    """
    speakers = manifest.speakers
    if k < 2:
        raise ConfigurationError('At least 2 folds are required, not {}.'.format(k))
    if len(speakers) < k:
        raise ConfigurationError('{} folds require at least {} speakers; the corpus has {}.'.format(
            k, k, len(speakers)))

    rng = numpy.random.default_rng(seed)
    order = rng.permutation(len(speakers))
    assignments = {speakers[i_speaker]: int(position % k) for position, i_speaker in enumerate(order)}
    return FoldPlan(k, assignments, seed=seed)


def write_fold_plan(path, plan):
    with open(path, 'w') as file:
        json.dump(plan.to_dict(), file, indent=2)


def read_fold_plan(path):
    """ Read a fold plan exported with :obj:`write_fold_plan`

    Args:
        path (:obj:`str`): path to the JSON file

    Returns:
        :obj:`FoldPlan`: plan
    """
    if not os.path.isfile(path):
        raise FileNotFoundError('Fold plan `{}` not found.'.format(path))
    with open(path, 'r') as file:
        try:
            return FoldPlan.from_dict(json.load(file))
        except (ValueError, KeyError) as exception:
            raise ConfigurationError('Fold plan `{}` could not be read: {}'.format(path, exception))


def write_feature_file(path, seq):
    """ Write a feature sequence to a little-endian binary file

    Layout: magic ``IKFT``, version (u16), kind (u8), ``T`` (u32), ``L`` (u32), ``n_F`` (u32), ``L x n_F``
    float32 values (row-major), ``L`` mask bytes.

    Args:
        path (:obj:`str`): path to the file
        seq (:obj:`FeatureSequence`): sequence
    """
    header = FEATURE_FILE_HEADER.pack(FEATURE_FILE_MAGIC, FEATURE_FILE_VERSION, FEATURE_KIND_CODES[seq.kind],
                                      seq.n_frames, seq.length, seq.n_features)
    with open(path, 'wb') as file:
        file.write(header)
        file.write(numpy.ascontiguousarray(seq.values, dtype='<f4').tobytes())
        file.write(seq.mask.astype(numpy.uint8).tobytes())


def read_feature_file(path, clip_id=None, validate=True):
    """ Read a feature sequence written with :obj:`write_feature_file`

    Args:
        path (:obj:`str`): path to the file
        clip_id (:obj:`str`, optional): id of the clip (default: file name up to the first dot)
        validate (:obj:`bool`, optional): whether to check the invariants of the sequence

    Returns:
        :obj:`FeatureSequence`: sequence (float32 values)

    Raises:
        :obj:`FileNotFoundError`: if the file doesn't exist
        :obj:`FeatureFileError`: if the file is malformed
    """
    if not os.path.isfile(path):
        raise FileNotFoundError('Feature file `{}` not found.'.format(path))
    if clip_id is None:
        clip_id = os.path.basename(path).split('.')[0]

    with open(path, 'rb') as file:
        content = file.read()

    if len(content) < FEATURE_FILE_HEADER.size:
        raise FeatureFileError('`{}` is truncated.'.format(path))
    magic, version, kind_code, n_frames, length, n_features = FEATURE_FILE_HEADER.unpack_from(content)
    if magic != FEATURE_FILE_MAGIC:
        raise FeatureFileError('`{}` is not a feature file.'.format(path))
    if version != FEATURE_FILE_VERSION:
        raise FeatureFileError('`{}` has version {}; only version {} is supported.'.format(
            path, version, FEATURE_FILE_VERSION))
    kinds = {code: kind for kind, code in FEATURE_KIND_CODES.items()}
    if kind_code not in kinds:
        raise FeatureFileError('`{}` has unknown feature kind {}.'.format(path, kind_code))

    n_value_bytes = 4 * length * n_features
    if len(content) != FEATURE_FILE_HEADER.size + n_value_bytes + length:
        raise FeatureFileError('`{}` should contain {} bytes, not {}.'.format(
            path, FEATURE_FILE_HEADER.size + n_value_bytes + length, len(content)))

    offset = FEATURE_FILE_HEADER.size
    values = numpy.frombuffer(content, dtype='<f4', count=length * n_features, offset=offset) \
        .reshape(length, n_features).astype(numpy.float32)
    mask = numpy.frombuffer(content, dtype=numpy.uint8, count=length, offset=offset + n_value_bytes).astype(bool)

    seq = FeatureSequence(kinds[kind_code], values, mask, n_frames=n_frames, clip_id=clip_id)
    if validate:
        try:
            seq.validate()
        except ValueError as exception:
            raise FeatureFileError('`{}` is not valid: {}'.format(path, exception))
    return seq
