# Generated by Django 5.2.5 on 2026-10-18 09:12

import django.core.validators
import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('kind', models.CharField(choices=[('RUN', 'Single trial'), ('SWEEP', 'Committee-size sweep')], default='RUN', max_length=10)),
                ('label', models.CharField(blank=True, max_length=200)),
                ('config', models.JSONField(default=dict, help_text='Validated experiment configuration as run.')),
                ('space_fingerprint', models.CharField(help_text="Hash of the candidate space's feature names and sizes.", max_length=64)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='TrialResult',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('strategy', models.CharField(max_length=20)),
                ('committee_size', models.PositiveIntegerField(validators=[django.core.validators.MinValueValidator(1)])),
                ('seed', models.PositiveBigIntegerField()),
                ('tau', models.PositiveBigIntegerField(help_text='Candidates screened until the committee was filled.')),
                ('loss', models.FloatField(blank=True, null=True)),
                ('constraint_loss', models.FloatField(blank=True, null=True)),
                ('accepted', models.PositiveIntegerField(default=0)),
                ('rejected', models.PositiveBigIntegerField(default=0)),
                ('status', models.CharField(choices=[('COMPLETED', 'Completed'), ('TIMED_OUT', 'Timed out')], default='COMPLETED', max_length=10)),
                ('episodes', models.PositiveIntegerField(default=0)),
                ('cell_counts', models.JSONField(default=list, help_text='Accepted members per feature value.')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='trials', to='committees.experimentrun')),
            ],
            options={
                'ordering': ['run', 'strategy', 'committee_size', 'seed'],
                'indexes': [models.Index(fields=['strategy', 'committee_size'], name='trial_strategy_k_idx')],
            },
        ),
    ]
