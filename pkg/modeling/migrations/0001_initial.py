# Generated migration

from django.db import migrations, models
import django.db.models.deletion
import django.utils.timezone
import uuid


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='TrainingRun',
            fields=[
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('config_path', models.CharField(blank=True, max_length=1000)),
                ('config', models.JSONField(default=dict, help_text='Resolved schedule and model config')),
                ('seed', models.IntegerField(default=0)),
                ('checkpoint_path', models.CharField(blank=True, max_length=1000)),
                ('status', models.CharField(choices=[('RUNNING', 'Running'), ('SUCCEEDED', 'Succeeded'), ('FAILED', 'Failed')], db_index=True, default='RUNNING', max_length=20)),
                ('error', models.TextField(blank=True)),
                ('started_at', models.DateTimeField(db_index=True, default=django.utils.timezone.now)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'db_table': 'training_run',
                'ordering': ['-started_at'],
            },
        ),
        migrations.CreateModel(
            name='StageRecord',
            fields=[
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('position', models.PositiveIntegerField()),
                ('label', models.CharField(max_length=20)),
                ('regime', models.CharField(db_index=True, max_length=20)),
                ('corpus', models.CharField(max_length=1000)),
                ('steps', models.PositiveIntegerField(default=0)),
                ('trainable_parameters', models.BigIntegerField(default=0)),
                ('total_parameters', models.BigIntegerField(default=0)),
                ('final_loss', models.FloatField(blank=True, null=True)),
                ('wall_time_seconds', models.FloatField(default=0.0)),
                ('report', models.JSONField(default=dict)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='stages', to='modeling.trainingrun')),
            ],
            options={
                'db_table': 'training_stage',
                'ordering': ['run', 'position'],
            },
        ),
        migrations.AddConstraint(
            model_name='stagerecord',
            constraint=models.UniqueConstraint(fields=('run', 'position'), name='unique_stage_position'),
        ),
    ]
