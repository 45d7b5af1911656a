# Generated by Django 5.2.4 on 2026-10-12 09:14

import autoslug.fields
import bench.models
import django.core.validators
import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='Experiment',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(default='experiment', max_length=255)),
                ('slug', autoslug.fields.AutoSlugField(editable=False, populate_from='name', unique=True)),
                ('kind', models.CharField(choices=[('disks', 'Disks'), ('blocks', 'Blocks'), ('ramp', 'Ramp')], default='disks', max_length=16)),
                ('size', models.PositiveIntegerField(default=32, validators=[django.core.validators.MinValueValidator(8), django.core.validators.MaxValueValidator(2048)])),
                ('intensity_low', models.FloatField(default=0.0, validators=[django.core.validators.MinValueValidator(0)])),
                ('intensity_high', models.FloatField(default=1000.0, validators=[bench.models.validate_positive])),
                ('i_max', models.FloatField(default=1.0, validators=[bench.models.validate_positive])),
                ('background', models.FloatField(default=10.0, validators=[django.core.validators.MinValueValidator(0)])),
                ('beta', models.FloatField(default=0.00526, validators=[django.core.validators.MinValueValidator(0)])),
                ('seed', models.PositiveIntegerField(default=0)),
                ('psf_size', models.PositiveSmallIntegerField(default=9, validators=[django.core.validators.MinValueValidator(1), bench.models.validate_odd])),
                ('psf_sigma', models.FloatField(default=1.3, validators=[bench.models.validate_positive])),
                ('x0_policy', models.CharField(choices=[('data', 'Data'), ('flat', 'Flat')], default='data', max_length=8)),
                ('method', models.CharField(choices=[('PDHG', 'PDHG'), ('SPDHG', 'Scaled PDHG'), ('SL', 'Level'), ('SSL', 'Scaled level')], default='SPDHG', max_length=5)),
                ('max_iter', models.PositiveIntegerField(default=3000)),
                ('reference_iter', models.PositiveIntegerField(default=100000, validators=[django.core.validators.MinValueValidator(1)])),
                ('rho_max', models.FloatField(default=1000000000000.0, validators=[bench.models.validate_positive])),
                ('preset', models.CharField(blank=True, choices=[('cameraman', 'Cameraman'), ('micro', 'Micro'), ('phantom', 'Phantom')], max_length=16)),
                ('t1', models.FloatField(default=0.5, validators=[django.core.validators.MinValueValidator(0)])),
                ('t2', models.FloatField(default=0.005, validators=[django.core.validators.MinValueValidator(0)])),
                ('t3', models.FloatField(default=0.5, validators=[django.core.validators.MinValueValidator(0)])),
                ('t4', models.FloatField(default=5e-05, validators=[django.core.validators.MinValueValidator(0)])),
                ('t5', models.FloatField(default=10000000000000.0, validators=[django.core.validators.MinValueValidator(0)])),
                ('t6', models.FloatField(default=1.0, validators=[django.core.validators.MinValueValidator(0)])),
                ('delta0', models.FloatField(blank=True, null=True, validators=[bench.models.validate_positive])),
                ('path_bound', models.FloatField(blank=True, null=True, validators=[bench.models.validate_positive])),
                ('nu1', models.FloatField(default=0.5, validators=[bench.models.validate_open_unit])),
                ('nu2', models.FloatField(default=0.5, validators=[bench.models.validate_open_unit])),
                ('plot', models.BooleanField(default=True)),
                ('output_dir', models.CharField(blank=True, max_length=1024)),
                ('status', models.CharField(choices=[('P', 'Pending'), ('C', 'Complete'), ('D', 'Diverged'), ('F', 'Failed')], default='P', max_length=1)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('iterations', models.PositiveIntegerField(blank=True, null=True)),
                ('f_star', models.FloatField(blank=True, null=True)),
                ('final_f', models.FloatField(blank=True, null=True)),
                ('final_e', models.FloatField(blank=True, null=True)),
                ('final_f_rel', models.FloatField(blank=True, null=True)),
                ('k_e_1e2', models.PositiveIntegerField(blank=True, null=True)),
                ('time_e_1e2', models.FloatField(blank=True, null=True)),
                ('k_e_1e3', models.PositiveIntegerField(blank=True, null=True)),
                ('time_e_1e3', models.FloatField(blank=True, null=True)),
                ('level_updates', models.PositiveIntegerField(blank=True, null=True)),
                ('diverged_at', models.PositiveIntegerField(blank=True, null=True)),
                ('rel_error_true', models.FloatField(blank=True, null=True)),
                ('absolute_metrics', models.BooleanField(default=False)),
                ('csv_path', models.CharField(blank=True, max_length=1024)),
            ],
            options={
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='TraceRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('k', models.PositiveIntegerField()),
                ('time_s', models.FloatField()),
                ('f', models.FloatField()),
                ('e_k', models.FloatField(blank=True, null=True)),
                ('f_k', models.FloatField(blank=True, null=True)),
                ('alpha_k', models.FloatField(blank=True, null=True)),
                ('eps_k', models.FloatField(blank=True, null=True)),
                ('delta_l', models.FloatField(blank=True, null=True)),
                ('u_norm', models.FloatField(blank=True, null=True)),
                ('experiment', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='records', to='bench.experiment')),
            ],
            options={
                'ordering': ['k'],
                'constraints': [models.UniqueConstraint(fields=('experiment', 'k'), name='unique_k_per_experiment')],
            },
        ),
    ]
