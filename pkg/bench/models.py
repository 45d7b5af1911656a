from django.contrib import admin
from django.core.exceptions import ValidationError
from django.core.validators import MaxValueValidator, MinValueValidator
from django.db import models
from autoslug import AutoSlugField

from optim.imaging import PHANTOM_KINDS
from optim.spdhg import METHODS, MODE_SSL, X0_POLICIES
from optim.stepsize import PolySchedule, ScheduleError, validate_level_schedule, validate_square_summable


def validate_positive(value):
    if not value > 0:
        raise ValidationError('Ensure this value is greater than 0.', code='min_value')


def validate_open_unit(value):
    if not 0 < value < 1:
        raise ValidationError('Ensure this value lies strictly between 0 and 1.', code='range')


def validate_odd(value):
    if value % 2 == 0:
        raise ValidationError('Ensure this value is odd.', code='odd')


class Experiment(models.Model):
    """
    One solver run on one synthetic deblurring problem.

    An unsaved instance is the in-memory experiment specification handed to
    the harness; saved instances also carry the run summary.
    """
    KIND_CHOICES = [(kind, kind.title()) for kind in PHANTOM_KINDS]

    METHOD_PDHG = 'PDHG'
    METHOD_SPDHG = 'SPDHG'
    METHOD_SL = 'SL'
    METHOD_SSL = 'SSL'

    METHOD_CHOICES = [
        (METHOD_PDHG, 'PDHG'),
        (METHOD_SPDHG, 'Scaled PDHG'),
        (METHOD_SL, 'Level'),
        (METHOD_SSL, 'Scaled level'),
    ]

    PRESET_CHOICES = [
        ('cameraman', 'Cameraman'),
        ('micro', 'Micro'),
        ('phantom', 'Phantom'),
    ]

    X0_CHOICES = [(policy, policy.title()) for policy in X0_POLICIES]

    STATUS_PENDING = 'P'
    STATUS_COMPLETE = 'C'
    STATUS_DIVERGED = 'D'
    STATUS_FAILED = 'F'

    STATUS_CHOICES = [
        (STATUS_PENDING, 'Pending'),
        (STATUS_COMPLETE, 'Complete'),
        (STATUS_DIVERGED, 'Diverged'),
        (STATUS_FAILED, 'Failed'),
    ]

    # Config file layout: section -> field names.
    CONFIG_SECTIONS = {
        'problem': [
            'name', 'kind', 'size', 'intensity_low', 'intensity_high', 'i_max', 'background',
            'beta', 'seed', 'psf_size', 'psf_sigma', 'x0_policy',
        ],
        'method': ['method', 'max_iter', 'reference_iter', 'rho_max'],
        'schedule': ['preset', 't1', 't2', 't3', 't4', 't5', 't6', 'delta0', 'path_bound', 'nu1', 'nu2'],
        'output': ['plot', 'output_dir'],
    }

    name = models.CharField(max_length=255, default='experiment')
    slug = AutoSlugField(populate_from='name', unique=True)

    # Problem.
    kind = models.CharField(max_length=16, choices=KIND_CHOICES, default='disks')
    size = models.PositiveIntegerField(default=32, validators=[MinValueValidator(8), MaxValueValidator(2048)])
    intensity_low = models.FloatField(default=0.0, validators=[MinValueValidator(0)])
    intensity_high = models.FloatField(default=1000.0, validators=[validate_positive])
    i_max = models.FloatField(default=1.0, validators=[validate_positive])
    background = models.FloatField(default=10.0, validators=[MinValueValidator(0)])
    beta = models.FloatField(default=0.00526, validators=[MinValueValidator(0)])
    seed = models.PositiveIntegerField(default=0)
    psf_size = models.PositiveSmallIntegerField(default=9, validators=[MinValueValidator(1), validate_odd])
    psf_sigma = models.FloatField(default=1.3, validators=[validate_positive])
    x0_policy = models.CharField(max_length=8, choices=X0_CHOICES, default='data')

    # Method.
    method = models.CharField(max_length=5, choices=METHOD_CHOICES, default=METHOD_SPDHG)
    max_iter = models.PositiveIntegerField(default=3000)
    reference_iter = models.PositiveIntegerField(default=100000, validators=[MinValueValidator(1)])
    rho_max = models.FloatField(default=1e12, validators=[validate_positive])

    # Schedule: tau_k = t1 + t2 k, alpha_k = 1/(t3 + t4 k), gamma_k = t5/k^(1+t6).
    preset = models.CharField(max_length=16, choices=PRESET_CHOICES, blank=True)
    t1 = models.FloatField(default=0.5, validators=[MinValueValidator(0)])
    t2 = models.FloatField(default=5e-3, validators=[MinValueValidator(0)])
    t3 = models.FloatField(default=0.5, validators=[MinValueValidator(0)])
    t4 = models.FloatField(default=5e-5, validators=[MinValueValidator(0)])
    t5 = models.FloatField(default=1e13, validators=[MinValueValidator(0)])
    t6 = models.FloatField(default=1.0, validators=[MinValueValidator(0)])
    delta0 = models.FloatField(blank=True, null=True, validators=[validate_positive])
    path_bound = models.FloatField(blank=True, null=True, validators=[validate_positive])
    nu1 = models.FloatField(default=0.5, validators=[validate_open_unit])
    nu2 = models.FloatField(default=0.5, validators=[validate_open_unit])

    # Output.
    plot = models.BooleanField(default=True)
    output_dir = models.CharField(max_length=1024, blank=True)

    # Run summary.
    status = models.CharField(max_length=1, choices=STATUS_CHOICES, default=STATUS_PENDING)
    created_at = models.DateTimeField(auto_now_add=True)
    iterations = models.PositiveIntegerField(blank=True, null=True)
    f_star = models.FloatField(blank=True, null=True)
    final_f = models.FloatField(blank=True, null=True)
    final_e = models.FloatField(blank=True, null=True)
    final_f_rel = models.FloatField(blank=True, null=True)
    k_e_1e2 = models.PositiveIntegerField(blank=True, null=True)
    time_e_1e2 = models.FloatField(blank=True, null=True)
    k_e_1e3 = models.PositiveIntegerField(blank=True, null=True)
    time_e_1e3 = models.FloatField(blank=True, null=True)
    level_updates = models.PositiveIntegerField(blank=True, null=True)
    diverged_at = models.PositiveIntegerField(blank=True, null=True)
    rel_error_true = models.FloatField(blank=True, null=True)
    absolute_metrics = models.BooleanField(default=False)
    csv_path = models.CharField(max_length=1024, blank=True)

    def __str__(self):
        return f'{self.name} ({self.method})'

    @classmethod
    def spec_fields(cls):
        return [name for fields in cls.CONFIG_SECTIONS.values() for name in fields]

    @property
    def is_level_method(self):
        return METHODS[self.method][0] == MODE_SSL

    @property
    def schedule(self):
        return PolySchedule(self.t1, self.t2, self.t3, self.t4, self.t5, self.t6)

    def spec_dict(self):
        return {name: getattr(self, name) for name in self.spec_fields()}

    @admin.display(description='Final e')
    def final_error(self):
        return None if self.final_e is None else f'{self.final_e:.3e}'

    def clean(self):
        errors = {}
        if self.intensity_high is not None and self.intensity_low is not None \
                and not self.intensity_high > self.intensity_low:
            errors['intensity_high'] = 'Must be greater than intensity_low.'
        if self.psf_size and self.size and self.psf_size > self.size:
            errors['psf_size'] = 'The psf cannot be larger than the image.'

        if self.is_level_method:
            if self.t3 or self.t4:
                errors['t3'] = 'Level methods take no alpha schedule; set t3 = t4 = 0.'
        elif self.delta0 is not None or self.path_bound is not None:
            errors['delta0'] = 'delta0 and path_bound only apply to the level methods SL and SSL.'

        if not errors:
            try:
                schedule = self.schedule
            except ScheduleError as exc:
                errors['schedule'] = str(exc)
            else:
                report = validate_level_schedule(schedule) if self.is_level_method else validate_square_summable(schedule)
                if not report.is_valid:
                    errors['schedule'] = f'Schedule violates convergence conditions: {report}'

        if errors:
            raise ValidationError(errors)
        return super().clean()

    class Meta:
        ordering = ['-created_at']


class TraceRecord(models.Model):
    """
    One iteration of a persisted Experiment.
    """
    experiment = models.ForeignKey(Experiment, on_delete=models.CASCADE, related_name='records')
    k = models.PositiveIntegerField()
    time_s = models.FloatField()
    f = models.FloatField()
    e_k = models.FloatField(blank=True, null=True)
    f_k = models.FloatField(blank=True, null=True)
    alpha_k = models.FloatField(blank=True, null=True)
    eps_k = models.FloatField(blank=True, null=True)
    delta_l = models.FloatField(blank=True, null=True)
    u_norm = models.FloatField(blank=True, null=True)

    class Meta:
        ordering = ['k']
        constraints = [
            models.UniqueConstraint(fields=['experiment', 'k'], name='unique_k_per_experiment')
        ]
